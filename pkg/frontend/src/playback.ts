// Audition playback: melody notes plus block chords on the audio clock.
// Scheduling is split in two so tests stay honest: buildSchedule computes
// what should sound when (pure), and Player pushes that onto any object
// that looks enough like an AudioContext.

import { chordTones } from "./chords";
import { SessionState } from "./state";
import { add, cmp, rat, ratMax, ratMin, sub, toNumber } from "./rational";

export interface ScheduledTone {
  kind: "melody" | "chord";
  midi: number;
  startBeat: number;
  durationBeats: number;
  gain: number;
}

export interface LoopRegion {
  startFrame: number;
  endFrame: number; // exclusive
}

const CHORD_BASE_MIDI = 48; // voice chords in the octave above C3

// Everything sounding inside the loop region, in beats relative to the
// region start. Chords sound as block voicings per contiguous run of equal
// chords; their pitch classes are exactly the chord tones of the label.
export function buildSchedule(state: SessionState, loop: LoopRegion): ScheduledTone[] {
  const { framed, chords } = state;
  const n = framed.numFrames;
  if (loop.startFrame < 0 || loop.endFrame > n || loop.startFrame >= loop.endFrame) {
    throw new Error(`bad loop region [${loop.startFrame}, ${loop.endFrame}) for ${n} frames`);
  }
  const halfBar = framed.halfBar;
  const regionStart = rat(loop.startFrame * halfBar.n, halfBar.d);
  const regionEnd = rat(loop.endFrame * halfBar.n, halfBar.d);
  const out: ScheduledTone[] = [];

  for (const note of framed.notes) {
    const noteEnd = add(note.onset, note.duration);
    const start = ratMax(note.onset, regionStart);
    const end = ratMin(noteEnd, regionEnd);
    if (cmp(start, end) >= 0) continue;
    out.push({
      kind: "melody",
      midi: note.midi,
      startBeat: toNumber(sub(start, regionStart)),
      durationBeats: toNumber(sub(end, start)),
      gain: 0.5,
    });
  }

  let runStart = loop.startFrame;
  for (let t = loop.startFrame; t <= loop.endFrame; t++) {
    const boundary = t === loop.endFrame || chords[t] !== chords[runStart];
    if (!boundary) continue;
    const idx = chords[runStart];
    if (idx !== null && idx !== undefined && runStart < t) {
      const startBeat = (runStart - loop.startFrame) * toNumber(halfBar);
      const durationBeats = (t - runStart) * toNumber(halfBar);
      for (const pc of chordTones(idx)) {
        out.push({
          kind: "chord",
          midi: CHORD_BASE_MIDI + pc,
          startBeat,
          durationBeats,
          gain: 0.18,
        });
      }
    }
    runStart = t;
  }
  return out;
}

export function midiToHz(midi: number): number {
  return 440 * Math.pow(2, (midi - 69) / 12);
}

// The slice of AudioContext the player needs; tests pass a recording fake.
export interface ToneSink {
  currentTime: number;
  scheduleTone(freqHz: number, startSec: number, durationSec: number, gain: number): void;
}

export class WebAudioSink implements ToneSink {
  private readonly ctx: AudioContext;
  constructor(ctx: AudioContext) {
    this.ctx = ctx;
  }
  get currentTime(): number {
    return this.ctx.currentTime;
  }
  scheduleTone(freqHz: number, startSec: number, durationSec: number, gain: number): void {
    const osc = this.ctx.createOscillator();
    const amp = this.ctx.createGain();
    osc.type = "triangle";
    osc.frequency.value = freqHz;
    // short attack/release ramps so block chords do not click
    const a = Math.min(0.01, durationSec / 4);
    amp.gain.setValueAtTime(0, startSec);
    amp.gain.linearRampToValueAtTime(gain, startSec + a);
    amp.gain.setValueAtTime(gain, startSec + durationSec - a);
    amp.gain.linearRampToValueAtTime(0, startSec + durationSec);
    osc.connect(amp).connect(this.ctx.destination);
    osc.start(startSec);
    osc.stop(startSec + durationSec);
  }
}

export interface PlayerStatus {
  playing: boolean;
  playheadFrame: number;
  loop: LoopRegion;
}

// Transport over a ToneSink. One schedule pass per loop lap; a timer keeps
// the playhead frame current and re-schedules when the lap ends.
export class Player {
  private readonly sink: ToneSink;
  private readonly beatsPerSecond: number;
  private timer: ReturnType<typeof setInterval> | null = null;
  private lapStartSec = 0;
  private lapBeats = 0;
  private looping = false;
  status: PlayerStatus;
  onTick: ((s: PlayerStatus) => void) | null = null;

  constructor(sink: ToneSink, bpm = 100) {
    this.sink = sink;
    this.beatsPerSecond = bpm / 60;
    this.status = { playing: false, playheadFrame: 0, loop: { startFrame: 0, endFrame: 1 } };
  }

  play(state: SessionState, loop: LoopRegion, loopForever: boolean): void {
    this.stopTimer();
    this.status.loop = loop;
    this.looping = loopForever;
    const halfBarBeats = toNumber(state.framed.halfBar);
    this.lapBeats = (loop.endFrame - loop.startFrame) * halfBarBeats;
    const scheduleLap = () => {
      this.lapStartSec = this.sink.currentTime + 0.05;
      for (const tone of buildSchedule(state, loop)) {
        this.sink.scheduleTone(
          midiToHz(tone.midi),
          this.lapStartSec + tone.startBeat / this.beatsPerSecond,
          tone.durationBeats / this.beatsPerSecond,
          tone.gain,
        );
      }
    };
    scheduleLap();
    this.status.playing = true;
    this.status.playheadFrame = loop.startFrame;
    this.timer = setInterval(() => {
      const beats = (this.sink.currentTime - this.lapStartSec) * this.beatsPerSecond;
      if (beats >= this.lapBeats) {
        if (this.looping) {
          scheduleLap();
          this.status.playheadFrame = loop.startFrame;
        } else {
          this.stop();
        }
      } else if (beats >= 0) {
        this.status.playheadFrame = loop.startFrame + Math.floor(beats / halfBarBeats);
      }
      this.onTick?.(this.status);
    }, 50);
  }

  // Stop resets the playhead to the loop start.
  stop(): void {
    this.stopTimer();
    this.status.playing = false;
    this.status.playheadFrame = this.status.loop.startFrame;
    this.onTick?.(this.status);
  }

  private stopTimer(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
