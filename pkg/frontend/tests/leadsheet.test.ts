import { describe, expect, it } from "vitest";
import {
  LeadSheetFormatError, chordsAtFrames, frameMelody, parseLeadSheet, sessionToDoc,
} from "../src/leadsheet";
import { parseChordSymbol } from "../src/chords";
import { scaleSheet } from "./fixtures";

describe("parseLeadSheet", () => {
  it("accepts the fixture and ignores chords-to-come", () => {
    const doc = parseLeadSheet(JSON.stringify(scaleSheet(2)));
    expect(doc.melody).toHaveLength(8);
    expect(doc.key.tonic).toBe("C");
  });

  it("reports invalid JSON at the root path", () => {
    expect(() => parseLeadSheet("{nope")).toThrowError(/^\$: invalid JSON/);
  });

  it("carries the field path for schema violations", () => {
    const bad = scaleSheet(1) as unknown as { melody: { midi: number }[] };
    bad.melody[1]!.midi = 200;
    try {
      parseLeadSheet(JSON.stringify(bad));
      expect.unreachable("should have thrown");
    } catch (e) {
      expect(e).toBeInstanceOf(LeadSheetFormatError);
      expect((e as LeadSheetFormatError).path).toBe("melody[1].midi");
    }
  });

  it("rejects unparseable chord symbols with their path", () => {
    const doc = scaleSheet(1);
    doc.chords.push({ onset: [0, 1], duration: [2, 1], symbol: "Q7" });
    expect(() => parseLeadSheet(JSON.stringify(doc))).toThrowError(/chords\[0\]\.symbol/);
  });

  it("rejects nonpositive durations and denominators", () => {
    const doc = scaleSheet(1);
    doc.melody[0]!.duration = [0, 1];
    expect(() => parseLeadSheet(JSON.stringify(doc))).toThrow(/duration/);
    const doc2 = scaleSheet(1);
    doc2.melody[0]!.onset = [1, 0];
    expect(() => parseLeadSheet(JSON.stringify(doc2))).toThrow(/denominator/);
  });
});

describe("frameMelody", () => {
  it("gives an 8-bar 4/4 sheet exactly 16 half-bar frames", () => {
    const framed = frameMelody(scaleSheet(8));
    expect(framed.numFrames).toBe(16);
    expect(framed.chroma).toHaveLength(16);
    expect(framed.chroma[0]).toHaveLength(12);
  });

  it("marks chroma only for pitch classes overlapping the frame", () => {
    // one whole note C4 held across both half-bar frames of a single bar
    const doc = parseLeadSheet(JSON.stringify({
      ...scaleSheet(2),
      melody: [{ onset: [0, 1], duration: [4, 1], midi: 60 }],
    }));
    const framed = frameMelody(doc);
    expect(framed.numFrames).toBe(2);
    expect(framed.chroma[0]).toEqual([1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
    expect(framed.chroma[1]).toEqual([1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
  });

  it("does not bleed a note ending exactly on a frame boundary", () => {
    const doc = parseLeadSheet(JSON.stringify({
      version: 1,
      key: { tonic: "C", mode: "major" },
      beats_per_bar: 4,
      melody: [
        { onset: [0, 1], duration: [2, 1], midi: 60 }, // exactly frame 0
        { onset: [2, 1], duration: [2, 1], midi: 62 }, // exactly frame 1
      ],
      chords: [],
    }));
    const framed = frameMelody(doc);
    expect(framed.numFrames).toBe(2);
    expect(framed.chroma[0]![0]).toBe(1);
    expect(framed.chroma[0]![2]).toBe(0);
    expect(framed.chroma[1]![0]).toBe(0);
    expect(framed.chroma[1]![2]).toBe(1);
  });

  it("splits a boundary-crossing note and attributes the overlap", () => {
    const doc = parseLeadSheet(JSON.stringify({
      version: 1,
      key: { tonic: "C", mode: "major" },
      beats_per_bar: 4,
      melody: [{ onset: [3, 2], duration: [1, 1], midi: 64 }], // 1.5..2.5 beats
      chords: [],
    }));
    const framed = frameMelody(doc);
    expect(framed.numFrames).toBe(2);
    expect(framed.frameNotes[0]).toEqual([{ pitchClass: 4, duration: { n: 1, d: 2 } }]);
    expect(framed.frameNotes[1]).toEqual([{ pitchClass: 4, duration: { n: 1, d: 2 } }]);
  });

  it("counts chord events toward the frame span", () => {
    const doc = parseLeadSheet(JSON.stringify({
      ...scaleSheet(1),
      chords: [{ onset: [0, 1], duration: [12, 1], symbol: "C" }],
    }));
    expect(frameMelody(doc).numFrames).toBe(6);
  });

  it("refuses an empty sheet", () => {
    const doc = parseLeadSheet(JSON.stringify({ ...scaleSheet(1), melody: [], chords: [] }));
    expect(() => frameMelody(doc)).toThrow(/empty/);
  });
});

describe("session documents", () => {
  it("assigns each frame the chord sounding at its start", () => {
    const doc = parseLeadSheet(JSON.stringify({
      ...scaleSheet(2),
      chords: [
        { onset: [0, 1], duration: [4, 1], symbol: "C" },
        { onset: [4, 1], duration: [2, 1], symbol: "G7" },
        // beats 6..8 silent
      ],
    }));
    const framed = frameMelody(doc);
    expect(chordsAtFrames(doc, framed)).toEqual([
      parseChordSymbol("C"), parseChordSymbol("C"), parseChordSymbol("G7"), null,
    ]);
  });

  it("the latest-starting overlapping event wins", () => {
    const doc = parseLeadSheet(JSON.stringify({
      ...scaleSheet(1),
      chords: [
        { onset: [0, 1], duration: [4, 1], symbol: "C" },
        { onset: [2, 1], duration: [2, 1], symbol: "Am" },
      ],
    }));
    const framed = frameMelody(doc);
    expect(chordsAtFrames(doc, framed)).toEqual([parseChordSymbol("C"), parseChordSymbol("Am")]);
  });

  it("round trips chords, pins, and sampler through sessionToDoc", () => {
    const framed = frameMelody(parseLeadSheet(JSON.stringify(scaleSheet(2))));
    const chords = [0, 0, 57, null] as (number | null)[];
    const pins = [false, true, true, false];
    const sampler = { temperature: 0.5, n: 7, seed: 42, seedLock: true };
    const names = ["C"];
    names.length = 0;
    const roots = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];
    const suffixes = ["", "m", "aug", "dim", "sus", "maj7", "m7", "7"];
    for (const r of roots) for (const s of suffixes) names.push(r + s);

    const doc = sessionToDoc(framed, chords, names, pins, sampler);
    // equal consecutive chords merge into one event
    expect(doc.chords).toEqual([
      { onset: [0, 1], duration: [4, 1], symbol: "C" },
      { onset: [4, 1], duration: [2, 1], symbol: names[57] },
    ]);
    expect(doc.pins).toEqual([1, 2]);
    expect(doc.sampler).toEqual(sampler);

    const reframed = frameMelody(doc);
    expect(reframed.numFrames).toBe(framed.numFrames);
    expect(chordsAtFrames(doc, reframed)).toEqual(chords);
  });
});
