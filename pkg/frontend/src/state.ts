// Session state and its transitions. Pure data in, new state out; the DOM
// layer renders whatever this module says, which is what makes the pin
// invariant testable: no code path here rewrites a pinned frame's chord
// except an explicit user pin/unpin.

import { HarmonizeRequest, HarmonizeResponse } from "./api";
import {
  FramedMelody, LeadSheetDoc, chordsAtFrames, frameMelody, sessionToDoc,
} from "./leadsheet";

export const UNDO_DEPTH = 32;

export interface SamplerSettings {
  temperature: number;
  n: number; // refinement iterations
  seed: number | null; // last seed seen (echoed by the server)
  seedLock: boolean; // reuse `seed` on the next resample instead of drawing
}

interface Snapshot {
  chords: (number | null)[];
  confidence: (number | null)[];
  seed: number | null;
}

export interface SessionState {
  framed: FramedMelody;
  chords: (number | null)[]; // one slot per half-bar frame
  pinned: boolean[];
  confidence: (number | null)[]; // probability of the shown chord, if known
  sampler: SamplerSettings;
  playbackFrame: number;
  undoStack: Snapshot[];
}

export function newSession(framed: FramedMelody, nDefault: number): SessionState {
  return {
    framed,
    chords: new Array(framed.numFrames).fill(null),
    pinned: new Array(framed.numFrames).fill(false),
    confidence: new Array(framed.numFrames).fill(null),
    sampler: { temperature: 1.0, n: nDefault, seed: null, seedLock: false },
    playbackFrame: 0,
    undoStack: [],
  };
}

// Pin invariant: a pin flag may only sit on a frame that has a chord.
export function checkInvariants(state: SessionState): void {
  for (let t = 0; t < state.pinned.length; t++) {
    if (state.pinned[t] && state.chords[t] === null) {
      throw new Error(`pin flag on empty frame ${t}`);
    }
  }
}

// Set a pin. With a chord given, the frame takes that chord and pins it.
// Without one, an already pinned frame unpins (keeping its chord); a frame
// holding an unpinned chord pins it as is; an empty frame stays untouched
// because there is nothing to hold fast.
export function togglePin(state: SessionState, frame: number, chord?: number): SessionState {
  if (frame < 0 || frame >= state.chords.length) {
    throw new Error(`frame ${frame} outside [0, ${state.chords.length})`);
  }
  const chords = state.chords.slice();
  const pinned = state.pinned.slice();
  const confidence = state.confidence.slice();
  if (chord !== undefined) {
    chords[frame] = chord;
    pinned[frame] = true;
    confidence[frame] = null;
  } else if (pinned[frame]) {
    pinned[frame] = false;
  } else if (chords[frame] !== null) {
    pinned[frame] = true;
  } else {
    return state;
  }
  const next = { ...state, chords, pinned, confidence };
  checkInvariants(next);
  return next;
}

export function clearAllPins(state: SessionState): SessionState {
  return { ...state, pinned: state.pinned.map(() => false) };
}

// The request a resample click sends. Pins travel as vocabulary indices
// keyed by frame; the seed goes along only under seed-lock.
export function buildHarmonizeRequest(state: SessionState): HarmonizeRequest {
  const pins: Record<string, number> = {};
  for (let t = 0; t < state.pinned.length; t++) {
    if (state.pinned[t]) pins[String(t)] = state.chords[t]!;
  }
  const req: HarmonizeRequest = {
    melody: state.framed.chroma as HarmonizeRequest["melody"],
    pins,
    temperature: state.sampler.temperature,
    n: state.sampler.n,
    include_distributions: true,
  };
  if (state.sampler.seedLock && state.sampler.seed !== null) {
    req.seed = state.sampler.seed;
  }
  return req;
}

// Fold a server response into the session. Pinned frames keep their local
// chord values on principle; the server guarantees they match, and
// applyHarmonizeResult refuses the response outright if they do not, so a
// contract break can never repaint a pinned cell.
export function applyHarmonizeResult(
  state: SessionState,
  resp: HarmonizeResponse,
): SessionState {
  if (resp.chords.length !== state.chords.length) {
    throw new Error(
      `server returned ${resp.chords.length} chords for ${state.chords.length} frames`,
    );
  }
  for (let t = 0; t < state.pinned.length; t++) {
    if (state.pinned[t] && resp.chords[t] !== state.chords[t]) {
      throw new Error(`server moved pinned frame ${t}`);
    }
  }
  const undoStack = [
    ...state.undoStack,
    { chords: state.chords.slice(), confidence: state.confidence.slice(), seed: state.sampler.seed },
  ].slice(-UNDO_DEPTH);
  const chords = state.chords.slice();
  const confidence = state.confidence.slice();
  for (let t = 0; t < chords.length; t++) {
    if (!state.pinned[t]) chords[t] = resp.chords[t]!;
    confidence[t] = resp.distributions ? resp.distributions[t]![resp.chords[t]!]! : null;
  }
  const next = {
    ...state,
    chords,
    confidence,
    sampler: { ...state.sampler, seed: resp.seed },
    undoStack,
  };
  checkInvariants(next);
  return next;
}

export function canUndo(state: SessionState): boolean {
  return state.undoStack.length > 0;
}

// Undo restores the progression (and shading) exactly as it was before the
// last applied resample. Pin flags are user intent, not progression: pinned
// frames keep their current chord, everything else takes the snapshot.
export function undo(state: SessionState): SessionState {
  const prev = state.undoStack[state.undoStack.length - 1];
  if (!prev) return state;
  const chords = prev.chords.slice();
  const confidence = prev.confidence.slice();
  for (let t = 0; t < chords.length; t++) {
    if (state.pinned[t]) {
      chords[t] = state.chords[t] ?? null;
      confidence[t] = state.confidence[t] ?? null;
    }
  }
  const next = {
    ...state,
    chords,
    confidence,
    sampler: { ...state.sampler, seed: prev.seed },
    undoStack: state.undoStack.slice(0, -1),
  };
  checkInvariants(next);
  return next;
}

export function exportSession(state: SessionState, chordNames: string[]): LeadSheetDoc {
  return sessionToDoc(
    state.framed,
    state.chords,
    chordNames,
    state.pinned,
    { ...state.sampler },
  );
}

// Rebuild a session from an exported document. Frames, chords, pins, and
// sampler settings come back; undo history and playback position are
// transient and start fresh.
export function importSession(doc: LeadSheetDoc, nDefault: number): SessionState {
  const framed = frameMelody(doc);
  const state = newSession(framed, nDefault);
  state.chords = chordsAtFrames(doc, framed);
  for (const t of doc.pins ?? []) {
    if (t >= framed.numFrames) throw new Error(`pin on frame ${t} beyond ${framed.numFrames} frames`);
    if (state.chords[t] === null) throw new Error(`pin on empty frame ${t}`);
    state.pinned[t] = true;
  }
  if (doc.sampler) state.sampler = { ...doc.sampler };
  checkInvariants(state);
  return state;
}

// Equality over everything the session file preserves.
export function sameSession(a: SessionState, b: SessionState): boolean {
  return (
    a.framed.numFrames === b.framed.numFrames &&
    JSON.stringify(a.framed.chroma) === JSON.stringify(b.framed.chroma) &&
    JSON.stringify(a.framed.notes) === JSON.stringify(b.framed.notes) &&
    JSON.stringify(a.chords) === JSON.stringify(b.chords) &&
    JSON.stringify(a.pinned) === JSON.stringify(b.pinned) &&
    JSON.stringify(a.sampler) === JSON.stringify(b.sampler)
  );
}
