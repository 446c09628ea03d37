// Typed client for the harmonization service. Request bodies are validated
// against local zod mirrors of the server's schemas before anything goes on
// the wire, and responses are validated on the way back, so a contract
// break surfaces as a typed error instead of NaN somewhere in the UI.

import { z } from "zod";

export const modelInfoSchema = z.object({
  vocab_hash: z.string(),
  chord_names: z.array(z.string()).length(96),
  hidden_size: z.number().int().positive(),
  n_default: z.number().int().positive(),
  stats: z.object({
    avg_chord_seq_len: z.number(),
    n_pieces: z.number().int(),
  }),
});
export type ModelInfo = z.infer<typeof modelInfoSchema>;

const chroma = z.array(z.union([z.literal(0), z.literal(1)])).length(12);

export const harmonizeRequestSchema = z.object({
  melody: z.array(chroma).min(1),
  pins: z.record(z.string().regex(/^\d+$/), z.union([z.number().int(), z.string()])),
  n: z.number().int().positive().optional(),
  temperature: z.number().min(0),
  seed: z.number().int().nonnegative().optional(),
  include_distributions: z.boolean(),
});
export type HarmonizeRequest = z.infer<typeof harmonizeRequestSchema>;

export const harmonizeResponseSchema = z.object({
  chords: z.array(z.number().int().min(0).max(95)),
  chord_names: z.array(z.string()),
  pins: z.record(z.string(), z.union([z.number(), z.string()])),
  seed: z.number().int(),
  distributions: z.array(z.array(z.number())).optional(),
});
export type HarmonizeResponse = z.infer<typeof harmonizeResponseSchema>;

// metric values are numbers except the flag marking whether chord tone
// distance was defined for the piece
export const evaluateResponseSchema = z.object({
  mean: z.record(z.string(), z.union([z.number(), z.boolean()])),
  per_piece: z.array(z.record(z.string(), z.union([z.number(), z.boolean()]))),
});

// 400 bodies carry a list of {loc, msg}; 422 bodies carry a string.
const errorDetailSchema = z.union([
  z.string(),
  z.array(z.object({ loc: z.array(z.string()), msg: z.string() })),
]);

export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;
  constructor(status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.status = status;
    this.detail = detail;
  }
}

function formatErrorBody(status: number, body: unknown): ApiError {
  const parsed = errorDetailSchema.safeParse(
    typeof body === "object" && body !== null ? (body as { detail?: unknown }).detail : body,
  );
  if (!parsed.success) return new ApiError(status, "unrecognized error body");
  if (typeof parsed.data === "string") return new ApiError(status, parsed.data);
  const lines = parsed.data.map((e) => `${e.loc.join(".")}: ${e.msg}`);
  return new ApiError(status, lines.join("; "));
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.base + path, init);
    } catch (e) {
      throw new ApiError(0, `network error: ${(e as Error).message}`);
    }
    let body: unknown = null;
    const text = await resp.text();
    if (text !== "") {
      try {
        body = JSON.parse(text);
      } catch {
        body = text;
      }
    }
    if (!resp.ok) throw formatErrorBody(resp.status, body);
    return body;
  }

  async health(): Promise<boolean> {
    const body = await this.request("/health");
    return body === "ok";
  }

  async modelInfo(): Promise<ModelInfo> {
    return modelInfoSchema.parse(await this.request("/model"));
  }

  async harmonize(req: HarmonizeRequest): Promise<HarmonizeResponse> {
    const checked = harmonizeRequestSchema.parse(req);
    const body = await this.request("/harmonize", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(checked),
    });
    return harmonizeResponseSchema.parse(body);
  }

  async evaluate(pieces: { chords: number[]; notes: [number, number, number][][] }[]) {
    const body = await this.request("/evaluate", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ harmonizations: pieces }),
    });
    return evaluateResponseSchema.parse(body);
  }
}

// At most one /harmonize request in flight; a request made while one is
// pending replaces any queued one and runs when the line clears (clicks
// coalesce onto the latest settings rather than piling up).
export class HarmonizeQueue {
  private readonly client: ApiClient;
  private inFlight = false;
  private queued: {
    req: HarmonizeRequest;
    resolve: (r: HarmonizeResponse) => void;
    reject: (e: unknown) => void;
  } | null = null;

  constructor(client: ApiClient) {
    this.client = client;
  }

  get busy(): boolean {
    return this.inFlight;
  }

  submit(req: HarmonizeRequest): Promise<HarmonizeResponse> {
    if (this.inFlight) {
      this.queued?.reject(new ApiError(0, "superseded by a newer request"));
      return new Promise((resolve, reject) => {
        this.queued = { req, resolve, reject };
      });
    }
    this.inFlight = true;
    return this.client.harmonize(req).finally(() => {
      this.inFlight = false;
      const next = this.queued;
      this.queued = null;
      if (next) {
        this.submit(next.req).then(next.resolve, next.reject);
      }
    });
  }
}
