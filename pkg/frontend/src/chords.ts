// Client-side mirror of the server's 96-chord vocabulary. The names shown
// in the UI always come from GET /model; this table exists so the client
// can group the picker by quality, sound chord tones, and resolve symbols
// in imported session files. On startup the app compares GET /model's name
// list against allChordNames() and refuses a model whose layout differs.

export const NUM_PITCH_CLASSES = 12;
export const NUM_QUALITIES = 8;
export const NUM_CHORDS = 96;

export const PITCH_CLASS_NAMES = [
  "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
] as const;

export const QUALITY_SUFFIXES = ["", "m", "aug", "dim", "sus", "maj7", "m7", "7"] as const;

export const QUALITY_LABELS = [
  "major", "minor", "augmented", "diminished", "suspended",
  "major 7th", "minor 7th", "dominant 7th",
] as const;

// Root-relative chord tones per quality ordinal; sus is sus4.
export const QUALITY_INTERVALS: ReadonlyArray<ReadonlyArray<number>> = [
  [0, 4, 7],
  [0, 3, 7],
  [0, 4, 8],
  [0, 3, 6],
  [0, 5, 7],
  [0, 4, 7, 11],
  [0, 3, 7, 10],
  [0, 4, 7, 10],
];

// Quality tokens accepted on import, reduced onto the 8 vocabulary
// qualities the same way the server reduces them.
const QUALITY_TOKENS: Record<string, number> = {
  "": 0,
  m: 1,
  aug: 2,
  dim: 3,
  sus: 4,
  sus2: 4,
  sus4: 4,
  maj7: 5,
  m7: 6,
  "7": 7,
  "9": 7,
  "11": 7,
  "13": 7,
  m9: 6,
  maj9: 5,
  m7b5: 3,
  dim7: 3,
};

const NATURALS: Record<string, number> = { C: 0, D: 2, E: 4, F: 5, G: 7, A: 9, B: 11 };

export function chordIndex(root: number, quality: number): number {
  return NUM_QUALITIES * root + quality;
}

export function chordRoot(index: number): number {
  return Math.floor(index / NUM_QUALITIES);
}

export function chordQuality(index: number): number {
  return index % NUM_QUALITIES;
}

export function chordName(index: number): string {
  if (!Number.isInteger(index) || index < 0 || index >= NUM_CHORDS) {
    throw new Error(`chord index out of range [0, ${NUM_CHORDS}): ${index}`);
  }
  return PITCH_CLASS_NAMES[chordRoot(index)]! + QUALITY_SUFFIXES[chordQuality(index)]!;
}

export function allChordNames(): string[] {
  const names: string[] = [];
  for (let i = 0; i < NUM_CHORDS; i++) names.push(chordName(i));
  return names;
}

// Pitch classes sounded by the chord (root position, no voicing).
export function chordTones(index: number): number[] {
  const root = chordRoot(index);
  const steps = QUALITY_INTERVALS[chordQuality(index)]!;
  return steps.map((s) => (root + s) % NUM_PITCH_CLASSES);
}

export class ChordSymbolError extends Error {
  constructor(symbol: string, reason: string) {
    super(`unrecognizable chord symbol ${JSON.stringify(symbol)}: ${reason}`);
  }
}

function parseRoot(text: string, symbol: string): [number, string] {
  const letter = text[0];
  if (letter === undefined || !(letter in NATURALS)) {
    throw new ChordSymbolError(symbol, "expected a root letter A-G");
  }
  let pc = NATURALS[letter]!;
  let rest = text.slice(1);
  if (rest.startsWith("#")) {
    pc = (pc + 1) % 12;
    rest = rest.slice(1);
  } else if (rest.startsWith("b")) {
    pc = (pc + 11) % 12;
    rest = rest.slice(1);
  }
  return [pc, rest];
}

// Symbol -> vocabulary index, with the same reduction grammar as the
// server: root letter, optional accidental, quality token, optional
// "/bass" which is dropped.
export function parseChordSymbol(symbol: string): number {
  const text = symbol.trim();
  const slash = text.indexOf("/");
  const body = slash === -1 ? text : text.slice(0, slash);
  const [root, token] = parseRoot(body, symbol);
  const quality = QUALITY_TOKENS[token];
  if (quality === undefined) {
    throw new ChordSymbolError(symbol, `unknown quality token ${JSON.stringify(token)}`);
  }
  if (slash !== -1) {
    const [, leftover] = parseRoot(text.slice(slash + 1), symbol);
    if (leftover !== "") {
      throw new ChordSymbolError(symbol, `malformed bass note ${JSON.stringify(text.slice(slash + 1))}`);
    }
  }
  return chordIndex(root, quality);
}
