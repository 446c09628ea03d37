// Lead-sheet JSON handling for the workbench: schema validation with field
// paths, half-bar framing of the melody for the piano roll, and the session
// file format (a valid lead sheet plus "pins" and "sampler" extension
// fields, which the core toolchain ignores on parse).

import { z } from "zod";
import { parseChordSymbol } from "./chords";
import {
  Rat, rat, add, sub, cmp, ratMin, ratMax, floorDiv, ceilDiv, asPair,
} from "./rational";

const rational = z
  .tuple([z.number().int(), z.number().int()])
  .refine(([, d]) => d > 0, { message: "denominator must be positive" });

const noteSchema = z.object({
  onset: rational,
  duration: rational.refine(([n]) => n > 0, { message: "duration must be positive" }),
  midi: z.number().int().min(0).max(127),
});

const chordEventSchema = z.object({
  onset: rational,
  duration: rational.refine(([n]) => n > 0, { message: "duration must be positive" }),
  symbol: z.string(),
});

export const leadSheetSchema = z.object({
  version: z.literal(1),
  title: z.string().optional(),
  key: z.object({
    tonic: z.string(),
    mode: z.enum(["major", "minor"]),
  }),
  beats_per_bar: z.number().int().positive(),
  melody: z.array(noteSchema),
  chords: z.array(chordEventSchema),
  // session extensions; absent in plain lead sheets
  pins: z.array(z.number().int().nonnegative()).optional(),
  sampler: z
    .object({
      temperature: z.number(),
      n: z.number().int().positive(),
      seed: z.number().int().nonnegative().nullable(),
      seedLock: z.boolean(),
    })
    .optional(),
});

export type LeadSheetDoc = z.infer<typeof leadSheetSchema>;

export interface NoteEvent {
  onset: Rat;
  duration: Rat;
  midi: number;
}

export interface FrameNote {
  pitchClass: number;
  duration: Rat; // overlap with the frame, for /evaluate payloads
}

// The framed view the UI works on. Chroma rows are what /harmonize takes.
export interface FramedMelody {
  beatsPerBar: number;
  key: { tonic: string; mode: "major" | "minor" };
  title: string;
  notes: NoteEvent[];
  numFrames: number;
  halfBar: Rat;
  chroma: number[][]; // numFrames x 12, 0/1
  frameNotes: FrameNote[][];
}

export class LeadSheetFormatError extends Error {
  readonly path: string;
  constructor(path: string, reason: string) {
    super(`${path}: ${reason}`);
    this.path = path;
  }
}

function issuePath(path: PropertyKey[]): string {
  if (path.length === 0) return "$";
  let out = "";
  for (const part of path) {
    if (typeof part === "number") out += `[${part}]`;
    else out += out === "" ? String(part) : `.${String(part)}`;
  }
  return out;
}

// Validate raw text or a parsed object; throws LeadSheetFormatError with the
// offending field path so the UI can show it inline.
export function parseLeadSheet(input: string | unknown): LeadSheetDoc {
  let doc: unknown = input;
  if (typeof input === "string") {
    try {
      doc = JSON.parse(input);
    } catch (e) {
      throw new LeadSheetFormatError("$", `invalid JSON: ${(e as Error).message}`);
    }
  }
  const res = leadSheetSchema.safeParse(doc);
  if (!res.success) {
    const first = res.error.issues[0]!;
    throw new LeadSheetFormatError(issuePath(first.path), first.message);
  }
  for (const [i, ev] of res.data.chords.entries()) {
    try {
      parseChordSymbol(ev.symbol);
    } catch (e) {
      throw new LeadSheetFormatError(`chords[${i}].symbol`, (e as Error).message);
    }
  }
  return res.data;
}

// Cut the melody into half-bar frames, mirroring the server toolchain: the
// frame count spans every event end in the document, a note marks a frame's
// chroma when its span overlaps the frame by a positive amount, and notes
// crossing a boundary are split with the overlap as the fragment duration.
export function frameMelody(doc: LeadSheetDoc): FramedMelody {
  const halfBar = rat(doc.beats_per_bar, 2);
  const notes: NoteEvent[] = doc.melody.map((n) => ({
    onset: rat(n.onset[0], n.onset[1]),
    duration: rat(n.duration[0], n.duration[1]),
    midi: n.midi,
  }));
  notes.sort((a, b) => cmp(a.onset, b.onset) || cmp(a.duration, b.duration));

  let total = rat(0);
  for (const n of notes) total = ratMax(total, add(n.onset, n.duration));
  for (const c of doc.chords) {
    total = ratMax(total, add(rat(c.onset[0], c.onset[1]), rat(c.duration[0], c.duration[1])));
  }
  if (cmp(total, rat(0)) <= 0) {
    throw new LeadSheetFormatError("$", "cannot frame an empty lead sheet");
  }
  const numFrames = ceilDiv(total, halfBar);

  const chroma: number[][] = [];
  const frameNotes: FrameNote[][] = [];
  for (let t = 0; t < numFrames; t++) {
    chroma.push(new Array(12).fill(0));
    frameNotes.push([]);
  }
  for (const note of notes) {
    const end = add(note.onset, note.duration);
    const first = floorDiv(note.onset, halfBar);
    const last = Math.min(ceilDiv(end, halfBar) - 1, numFrames - 1);
    for (let t = first; t <= last; t++) {
      const spanStart = rat(t * halfBar.n, halfBar.d);
      const spanEnd = add(spanStart, halfBar);
      const overlap = sub(ratMin(end, spanEnd), ratMax(note.onset, spanStart));
      if (cmp(overlap, rat(0)) <= 0) continue;
      const pc = note.midi % 12;
      chroma[t]![pc] = 1;
      frameNotes[t]!.push({ pitchClass: pc, duration: overlap });
    }
  }
  return {
    beatsPerBar: doc.beats_per_bar,
    key: doc.key,
    title: doc.title ?? "untitled",
    notes,
    numFrames,
    halfBar,
    chroma,
    frameNotes,
  };
}

// Chord at each frame start from the document's chord events (latest
// starting event sounding at the instant wins), for session import.
export function chordsAtFrames(doc: LeadSheetDoc, framed: FramedMelody): (number | null)[] {
  const events = doc.chords
    .map((c) => ({
      onset: rat(c.onset[0], c.onset[1]),
      end: add(rat(c.onset[0], c.onset[1]), rat(c.duration[0], c.duration[1])),
      index: parseChordSymbol(c.symbol),
    }))
    .sort((a, b) => cmp(a.onset, b.onset) || cmp(a.end, b.end));
  const out: (number | null)[] = [];
  for (let t = 0; t < framed.numFrames; t++) {
    const instant = rat(t * framed.halfBar.n, framed.halfBar.d);
    let found: number | null = null;
    for (const ev of events) {
      if (cmp(ev.onset, instant) > 0) break;
      if (cmp(ev.end, instant) > 0) found = ev.index;
    }
    out.push(found);
  }
  return out;
}

// Serialize a session back to a lead sheet: one chord event per frame that
// has a chord (consecutive equal chords merged), plus the pin and sampler
// extension fields.
export function sessionToDoc(
  framed: FramedMelody,
  chords: (number | null)[],
  chordNames: string[],
  pins: boolean[],
  sampler: { temperature: number; n: number; seed: number | null; seedLock: boolean },
): LeadSheetDoc {
  const events: LeadSheetDoc["chords"] = [];
  let runStart = 0;
  for (let t = 0; t <= chords.length; t++) {
    const boundary = t === chords.length || chords[t] !== chords[runStart];
    if (!boundary) continue;
    const idx = chords[runStart];
    if (idx !== null && runStart < t) {
      const onset = rat(runStart * framed.halfBar.n, framed.halfBar.d);
      const duration = rat((t - runStart) * framed.halfBar.n, framed.halfBar.d);
      events.push({
        onset: asPair(onset),
        duration: asPair(duration),
        symbol: chordNames[idx!]!,
      });
    }
    runStart = t;
  }
  return {
    version: 1,
    title: framed.title,
    key: framed.key,
    beats_per_bar: framed.beatsPerBar,
    melody: framed.notes.map((n) => ({
      onset: asPair(n.onset),
      duration: asPair(n.duration),
      midi: n.midi,
    })),
    chords: events,
    pins: pins.flatMap((p, t) => (p ? [t] : [])),
    sampler,
  };
}
