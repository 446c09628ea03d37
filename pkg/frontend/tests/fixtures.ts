// Shared fixtures: deterministic lead sheets and a scripted in-memory
// harmonization server good enough for the state/UI suites. The fake
// honors the real contract where the client can observe it: pins are
// echoed and kept, distributions are well formed, seeds are echoed.

import { LeadSheetDoc } from "../src/leadsheet";
import { FetchLike } from "../src/api";

// n bars of 4/4 with one quarter note per beat walking a C major scale.
// Total span is exactly n * 4 beats, so half-bar framing gives 2n frames.
export function scaleSheet(bars: number): LeadSheetDoc {
  const scale = [60, 62, 64, 65, 67, 69, 71, 72];
  const melody = [];
  for (let beat = 0; beat < bars * 4; beat++) {
    melody.push({
      onset: [beat, 1] as [number, number],
      duration: [1, 1] as [number, number],
      midi: scale[beat % scale.length]!,
    });
  }
  return {
    version: 1,
    title: `scale-${bars}bars`,
    key: { tonic: "C", mode: "major" },
    beats_per_bar: 4,
    melody,
    chords: [],
  };
}

export interface FakeServerLog {
  harmonizeBodies: unknown[];
  calls: number;
}

export interface FakeServerOptions {
  // chord index for non-pinned frame t on the k-th harmonize call
  chordAt?: (call: number, frame: number) => number;
  // status override per call number (1-based); body must be the error body
  failOn?: Map<number, { status: number; body: unknown }>;
  latencyMs?: number;
}

const json = (status: number, body: unknown) =>
  new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });

export function fakeServer(opts: FakeServerOptions = {}): { fetch: FetchLike; log: FakeServerLog } {
  const log: FakeServerLog = { harmonizeBodies: [], calls: 0 };
  const chordAt = opts.chordAt ?? ((call, frame) => (7 * call + 13 * frame) % 96);

  const names: string[] = [];
  const roots = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];
  const suffixes = ["", "m", "aug", "dim", "sus", "maj7", "m7", "7"];
  for (const r of roots) for (const s of suffixes) names.push(r + s);

  const fetchImpl: FetchLike = async (url, init) => {
    if (opts.latencyMs) await new Promise((r) => setTimeout(r, opts.latencyMs));
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    if (path.endsWith("/health")) return new Response("ok", { status: 200 });
    if (path.endsWith("/model")) {
      return json(200, {
        vocab_hash: "b159b11986bcc750",
        chord_names: names,
        hidden_size: 8,
        n_default: 4,
        stats: { avg_chord_seq_len: 8.0, n_pieces: 10 },
      });
    }
    if (path.endsWith("/harmonize")) {
      log.calls += 1;
      const body = JSON.parse(String(init?.body ?? "{}"));
      log.harmonizeBodies.push(body);
      const fail = opts.failOn?.get(log.calls);
      if (fail) return json(fail.status, fail.body);
      const T = body.melody.length;
      const chords: number[] = [];
      for (let t = 0; t < T; t++) {
        const pin = body.pins?.[String(t)];
        chords.push(pin !== undefined ? Number(pin) : chordAt(log.calls, t));
      }
      const distributions = body.include_distributions
        ? chords.map((c) => {
            const row = new Array(96).fill(0.2 / 95);
            row[c] = 0.8;
            return row;
          })
        : undefined;
      return json(200, {
        chords,
        chord_names: chords.map((c) => names[c]!),
        pins: body.pins ?? {},
        seed: body.seed ?? 1000 + log.calls,
        ...(distributions ? { distributions } : {}),
      });
    }
    return json(404, { detail: `no such route ${path}` });
  };
  return { fetch: fetchImpl, log };
}
