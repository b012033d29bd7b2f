// End-to-end: the client plays full games against a live service process.
//
// Spawns `kg20q serve` (the Python package must be installed), then drives
// the app's own api/state/render layers exactly as the browser would:
// a full solved game (start, answers, accepted guess) and a scripted
// inconsistent game whose revealed trace must show MISMATCH badges.

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { renderApp } from "../src/render.js";
import { GameController } from "../src/state.js";

const PORT = 8917;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;

async function waitForHealth(timeoutMs = 20_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/api/health`);
      if (response.ok) {
        return;
      }
    } catch {
      // server not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error("game service did not come up in time");
}

beforeAll(async () => {
  const statsPath = join(mkdtempSync(join(tmpdir(), "kg20q-e2e-")), "stats.json");
  server = spawn(
    "kg20q",
    ["serve", "--port", String(PORT), "--stats", statsPath],
    { stdio: "ignore" },
  );
  await waitForHealth();
}, 30_000);

afterAll(() => {
  server?.kill();
});

describe("full game against the live service", () => {
  it("starts, answers questions, and gets a guess accepted", async () => {
    const controller = new GameController(new ApiClient(BASE));
    await controller.startGame(1975);
    expect(controller.state.screen).toBe("question");
    expect(controller.state.question?.ordinal).toBe(1);
    expect(renderApp(controller.state)).toContain("Question 1 of 20");

    // Cooperative player: agrees with everything until guesses appear.
    let answered = 0;
    for (let step = 0; step < 25 && controller.state.screen === "question"; step++) {
      await controller.submitAnswer("yes");
      answered += 1;
    }
    expect(answered).toBeGreaterThanOrEqual(1);
    expect(controller.state.screen).toBe("guess");
    expect(controller.state.guesses.length).toBeGreaterThan(0);
    expect(controller.state.guesses.length).toBeLessThanOrEqual(5);

    // Rendered order must equal server order, probabilities descending.
    const html = renderApp(controller.state);
    const positions = controller.state.guesses.map((g) => html.indexOf(g.title));
    expect([...positions].sort((a, b) => a - b)).toEqual(positions);
    const probs = controller.state.guesses.map((g) => g.probability);
    expect([...probs].sort((a, b) => b - a)).toEqual(probs);

    await controller.acceptGuess(controller.state.guesses[0].movie_id);
    expect(controller.state.screen).toBe("solved");
    expect(renderApp(controller.state)).toContain("Got it:");
  }, 30_000);

  it("shows MISMATCH badges after revealing in an inconsistent game", async () => {
    const controller = new GameController(new ApiClient(BASE));
    await controller.startGame();

    // Contrarian player: denies everything and rejects every guess. The
    // budget runs out and the session ends in the trace screen.
    for (let step = 0; step < 45 && !["trace", "solved"].includes(controller.state.screen); step++) {
      if (controller.state.screen === "question") {
        await controller.submitAnswer("no");
      } else if (controller.state.screen === "guess") {
        await controller.rejectGuess();
      }
    }
    expect(controller.state.screen).toBe("trace");
    expect(controller.state.trace?.rows.length).toBeGreaterThan(0);

    // All-no answering always contradicts the revealed movie's own era.
    await controller.reveal("3 Idiots");
    expect(controller.state.screen).toBe("trace");
    const verdicts = controller.state.trace?.rows.map((r) => r.verdict) ?? [];
    expect(verdicts.filter((v) => v === "MISMATCH").length).toBeGreaterThanOrEqual(1);
    const html = renderApp(controller.state);
    expect(html).toContain('class="badge mismatch"');
  }, 30_000);

  it("keeps the screen and shows a banner when the game is gone", async () => {
    const controller = new GameController(new ApiClient(BASE));
    await controller.startGame();
    expect(controller.state.screen).toBe("question");
    // Sabotage the id to simulate an expired session.
    controller.state = { ...controller.state, gameId: "expired-id" };
    await controller.submitAnswer("yes");
    expect(controller.state.screen).toBe("question");
    expect(controller.state.error).toBeTruthy();
  }, 30_000);
});
