// View state machine. Screens mirror the server's session phases; every
// transition comes from a server response — the client never computes
// probabilities or eliminates movies on its own.

import {
  Answer,
  ApiClient,
  FinalPayload,
  GameResponse,
  GuessMovie,
  QuestionPayload,
  TracePayload,
} from "./api.js";

export type Screen = "start" | "question" | "guess" | "solved" | "trace";

export interface ViewState {
  screen: Screen;
  gameId: string | null;
  questionsUsed: number;
  maxQuestions: number;
  question: QuestionPayload | null;
  guesses: GuessMovie[];
  final: FinalPayload | null;
  trace: TracePayload | null;
  error: string | null;
  busy: boolean;
}

export function initialState(): ViewState {
  return {
    screen: "start",
    gameId: null,
    questionsUsed: 0,
    maxQuestions: 20,
    question: null,
    guesses: [],
    final: null,
    trace: null,
    error: null,
    busy: false,
  };
}

export function applyResponse(state: ViewState, response: GameResponse): ViewState {
  const base: ViewState = {
    ...state,
    gameId: response.game_id ?? state.gameId,
    questionsUsed: response.questions_used,
    maxQuestions: response.max_questions,
    error: null,
    busy: false,
  };
  if (response.final !== undefined) {
    const final = response.final;
    return {
      ...base,
      screen: final.status === "solved" ? "solved" : "trace",
      question: null,
      guesses: [],
      final,
      trace: final.trace ?? state.trace,
    };
  }
  if (response.guess !== undefined) {
    return {
      ...base,
      screen: "guess",
      question: null,
      guesses: response.guess.movies,
      final: null,
    };
  }
  if (response.question !== undefined) {
    return {
      ...base,
      screen: "question",
      question: response.question,
      guesses: [],
      final: null,
    };
  }
  return { ...base, error: "the service returned no pending item" };
}

export function applyError(state: ViewState, message: string): ViewState {
  // Keep the current screen so the player can retry.
  return { ...state, error: message, busy: false };
}

export class GameController {
  state: ViewState = initialState();

  constructor(
    private api: ApiClient,
    private onChange: (state: ViewState) => void = () => {},
  ) {}

  private setState(state: ViewState): void {
    this.state = state;
    this.onChange(state);
  }

  /** One request at a time: repeated submits are ignored while in flight. */
  private async run(action: () => Promise<GameResponse>): Promise<void> {
    if (this.state.busy) {
      return;
    }
    this.setState({ ...this.state, busy: true, error: null });
    try {
      const response = await action();
      this.setState(applyResponse(this.state, response));
    } catch (err) {
      const message = err instanceof Error ? err.message : String(err);
      this.setState(applyError(this.state, message));
    }
  }

  startGame(birthYear?: number): Promise<void> {
    return this.run(() => this.api.createGame(birthYear));
  }

  submitAnswer(answer: Answer): Promise<void> {
    const gameId = this.state.gameId;
    if (gameId === null || this.state.screen !== "question") {
      return Promise.resolve();
    }
    return this.run(() => this.api.submitAnswer(gameId, answer));
  }

  acceptGuess(movieId: string): Promise<void> {
    const gameId = this.state.gameId;
    if (gameId === null || this.state.screen !== "guess") {
      return Promise.resolve();
    }
    if (!this.state.guesses.some((g) => g.movie_id === movieId)) {
      this.setState(applyError(this.state, "pick one of the listed movies"));
      return Promise.resolve();
    }
    return this.run(() => this.api.submitGuessFeedback(gameId, true, movieId));
  }

  rejectGuess(): Promise<void> {
    const gameId = this.state.gameId;
    if (gameId === null || this.state.screen !== "guess") {
      return Promise.resolve();
    }
    return this.run(() => this.api.submitGuessFeedback(gameId, false));
  }

  reveal(title: string): Promise<void> {
    const gameId = this.state.gameId;
    if (gameId === null || title.trim() === "") {
      return Promise.resolve();
    }
    return this.run(() => this.api.reveal(gameId, title.trim()));
  }

  reset(): void {
    this.setState(initialState());
  }
}
