// Pure HTML renderers, one per screen. Keeping these as string functions
// makes the view testable without a DOM; main.ts mounts the result.

import { GuessMovie, TraceRow } from "./api.js";
import { ViewState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Display-only rounding: one decimal, e.g. 0.238 -> "23.8%". */
export function formatProbability(probability: number): string {
  return `${(probability * 100).toFixed(1)}%`;
}

function errorBanner(state: ViewState): string {
  if (state.error === null) {
    return "";
  }
  return `<div class="banner error" role="alert">${escapeHtml(state.error)}</div>`;
}

function renderStart(state: ViewState): string {
  return `
    ${errorBanner(state)}
    <section class="card start">
      <h2>Think of a Bollywood movie</h2>
      <p>Answer yes, no, or maybe — the service needs at most 20 questions.</p>
      <form data-action="start">
        <label>Birth year (optional, helps with eras)
          <input name="birth_year" type="number" min="1800" max="2100" placeholder="e.g. 1975">
        </label>
        <button type="submit" ${state.busy ? "disabled" : ""}>Start game</button>
      </form>
    </section>`;
}

function renderQuestion(state: ViewState): string {
  const question = state.question;
  if (question === null) {
    return errorBanner(state);
  }
  const disabled = state.busy ? "disabled" : "";
  return `
    ${errorBanner(state)}
    <section class="card question">
      <p class="ordinal">Question ${question.ordinal} of ${state.maxQuestions}</p>
      <h2>${escapeHtml(question.text)}</h2>
      <div class="answers">
        <button data-action="answer" data-answer="yes" ${disabled}>Yes</button>
        <button data-action="answer" data-answer="no" ${disabled}>No</button>
        <button data-action="answer" data-answer="maybe" ${disabled}>Maybe</button>
      </div>
    </section>`;
}

function guessItem(movie: GuessMovie, index: number, busy: boolean): string {
  return `
      <li>
        <label>
          <input type="radio" name="guess_pick" value="${escapeHtml(movie.movie_id)}"
                 ${index === 0 ? "checked" : ""} ${busy ? "disabled" : ""}>
          <span class="title">${escapeHtml(movie.title)}</span>
          <span class="probability">${formatProbability(movie.probability)}</span>
        </label>
      </li>`;
}

function renderGuess(state: ViewState): string {
  const disabled = state.busy ? "disabled" : "";
  const items = state.guesses
    .map((movie, index) => guessItem(movie, index, state.busy))
    .join("");
  return `
    ${errorBanner(state)}
    <section class="card guess">
      <h2>Is your movie one of these?</h2>
      <form data-action="accept-guess">
        <ol class="guess-list">${items}</ol>
        <div class="answers">
          <button type="submit" ${disabled}>Yes, that one</button>
          <button type="button" data-action="reject-guess" ${disabled}>No, none of these</button>
        </div>
      </form>
    </section>`;
}

function renderSolved(state: ViewState): string {
  const final = state.final;
  const title = final?.title ?? "your movie";
  const used = final?.questions_used ?? state.questionsUsed;
  return `
    ${errorBanner(state)}
    <section class="card solved">
      <h2>Got it: ${escapeHtml(title)}</h2>
      <p>Found in ${used} of ${state.maxQuestions} questions.</p>
      <button data-action="new-game">Play again</button>
    </section>`;
}

function traceRowHtml(row: TraceRow): string {
  const badge =
    row.verdict === "MATCH" || row.verdict === "MISMATCH"
      ? `<span class="badge ${row.verdict.toLowerCase()}">${row.verdict}</span>`
      : "";
  return `
      <tr>
        <td>${row.ordinal}</td>
        <td>${escapeHtml(row.question)}</td>
        <td>${escapeHtml(row.answer)}</td>
        <td>${row.fact === null ? "—" : escapeHtml(row.fact)}</td>
        <td>${badge}</td>
      </tr>`;
}

function renderTrace(state: ViewState): string {
  const rows = state.trace?.rows ?? [];
  const note = state.trace?.note;
  return `
    ${errorBanner(state)}
    <section class="card trace">
      <h2>You win! Here is what you told me</h2>
      <table class="trace-table">
        <thead><tr><th>#</th><th>question</th><th>you said</th><th>fact</th><th></th></tr></thead>
        <tbody>${rows.map(traceRowHtml).join("")}</tbody>
      </table>
      ${note ? `<p class="note">${escapeHtml(note)}</p>` : ""}
      <form data-action="reveal">
        <label>Which movie was it?
          <input name="title" type="text" placeholder="movie title">
        </label>
        <button type="submit" ${state.busy ? "disabled" : ""}>Check my answers</button>
      </form>
      <button data-action="new-game">Play again</button>
    </section>`;
}

export function renderApp(state: ViewState): string {
  switch (state.screen) {
    case "start":
      return renderStart(state);
    case "question":
      return renderQuestion(state);
    case "guess":
      return renderGuess(state);
    case "solved":
      return renderSolved(state);
    case "trace":
      return renderTrace(state);
  }
}
