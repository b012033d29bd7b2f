// Typed client for the kg20q session API. The server is authoritative for
// all game state; this module only shapes requests and decodes responses.

export type Answer = "yes" | "no" | "maybe";

export interface QuestionPayload {
  text: string;
  ordinal: number;
  level: string;
  value: string;
  layer: string;
}

export interface GuessMovie {
  movie_id: string;
  title: string;
  probability: number;
}

export interface TraceRow {
  ordinal: number;
  question: string;
  answer: string;
  fact: string | null;
  verdict: string;
}

export interface TracePayload {
  rows: TraceRow[];
  note: string | null;
  questions_used: number;
  rendered: string;
}

export interface FinalPayload {
  status: string;
  movie_id?: string;
  title?: string;
  questions_used: number;
  trace?: TracePayload;
}

export interface GameResponse {
  game_id: string;
  questions_used: number;
  max_questions: number;
  question?: QuestionPayload;
  guess?: { movies: GuessMovie[] };
  final?: FinalPayload;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<GameResponse> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, `cannot reach the game service: ${String(err)}`);
    }
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail =
        typeof body === "object" && body !== null && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return body as GameResponse;
  }

  private post(path: string, payload: unknown): Promise<GameResponse> {
    return this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  createGame(birthYear?: number): Promise<GameResponse> {
    const payload = birthYear === undefined ? {} : { birth_year: birthYear };
    return this.post("/api/games", payload);
  }

  getGame(gameId: string): Promise<GameResponse> {
    return this.request(`/api/games/${gameId}`);
  }

  submitAnswer(gameId: string, answer: Answer): Promise<GameResponse> {
    return this.post(`/api/games/${gameId}/answer`, { answer });
  }

  submitGuessFeedback(
    gameId: string,
    accepted: boolean,
    movieId?: string,
  ): Promise<GameResponse> {
    const payload =
      movieId === undefined ? { accepted } : { accepted, movie_id: movieId };
    return this.post(`/api/games/${gameId}/guess`, payload);
  }

  reveal(gameId: string, title: string): Promise<GameResponse> {
    return this.post(`/api/games/${gameId}/reveal`, { title });
  }
}
