// Browser bootstrap: mount the rendered view and translate DOM events into
// controller calls. The API base URL can be injected via a global before
// this module loads; same-origin by default.

import { Answer, ApiClient } from "./api.js";
import { renderApp } from "./render.js";
import { GameController } from "./state.js";

declare global {
  interface Window {
    KG20Q_API_BASE?: string;
  }
}

function mount(root: HTMLElement): void {
  const api = new ApiClient(window.KG20Q_API_BASE ?? "");
  const controller = new GameController(api, (state) => {
    root.innerHTML = renderApp(state);
  });
  root.innerHTML = renderApp(controller.state);

  root.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (target === null) {
      return;
    }
    const action = target.dataset.action;
    if (action === "answer") {
      event.preventDefault();
      void controller.submitAnswer(target.dataset.answer as Answer);
    } else if (action === "reject-guess") {
      event.preventDefault();
      void controller.rejectGuess();
    } else if (action === "new-game") {
      event.preventDefault();
      controller.reset();
    }
  });

  root.addEventListener("submit", (event) => {
    const form = event.target as HTMLFormElement;
    const action = form.dataset.action;
    if (action === undefined) {
      return;
    }
    event.preventDefault();
    if (action === "start") {
      const raw = new FormData(form).get("birth_year");
      const birthYear =
        typeof raw === "string" && raw.trim() !== "" ? Number(raw) : undefined;
      void controller.startGame(birthYear);
    } else if (action === "accept-guess") {
      const pick = new FormData(form).get("guess_pick");
      if (typeof pick === "string" && pick !== "") {
        void controller.acceptGuess(pick);
      }
    } else if (action === "reveal") {
      const title = new FormData(form).get("title");
      if (typeof title === "string") {
        void controller.reveal(title);
      }
    }
  });
}

const root = document.getElementById("app");
if (root !== null) {
  mount(root);
}
