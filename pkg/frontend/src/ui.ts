// DOM layer. One App instance owns a SessionState and re-renders the
// dynamic regions wholesale after every transition; at workbench sizes
// (tens of frames) that is cheaper than bookkeeping. All methods that
// tests drive (loadMelodyText, importSessionText, resample, ...) are
// plain public methods on App, so the suites run against the same code
// paths the buttons call.

import { ApiClient, ApiError, HarmonizeQueue } from "./api";
import { NUM_QUALITIES, QUALITY_LABELS, chordQuality } from "./chords";
import {
  LeadSheetFormatError, frameMelody, parseLeadSheet,
} from "./leadsheet";
import { LoopRegion, Player } from "./playback";
import {
  SessionState, applyHarmonizeResult, buildHarmonizeRequest, canUndo,
  exportSession, importSession, newSession, togglePin, undo,
} from "./state";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

export interface AppDeps {
  client: ApiClient;
  chordNames: string[];
  nDefault: number;
  player: Player | null; // null when no audio context is available
}

export class App {
  readonly root: HTMLElement;
  readonly deps: AppDeps;
  readonly queue: HarmonizeQueue;
  state: SessionState | null = null;
  pickerFrame: number | null = null;
  loop: LoopRegion = { startFrame: 0, endFrame: 1 };

  private readonly doc: Document;
  private readonly banner: HTMLElement;
  private readonly status: HTMLElement;
  private readonly rollHost: HTMLElement;
  private readonly laneHost: HTMLElement;
  private readonly pickerHost: HTMLElement;
  private readonly controlsHost: HTMLElement;
  private readonly ioText: HTMLTextAreaElement;

  constructor(root: HTMLElement, deps: AppDeps) {
    this.root = root;
    this.deps = deps;
    this.queue = new HarmonizeQueue(deps.client);
    this.doc = root.ownerDocument;
    const d = this.doc;

    this.banner = el(d, "div", { class: "banner", role: "alert", hidden: "" });
    this.status = el(d, "div", { class: "status" }, "no melody loaded");
    this.rollHost = el(d, "div", { class: "roll" });
    this.laneHost = el(d, "div", { class: "lane" });
    this.pickerHost = el(d, "div", { class: "picker", hidden: "" });
    this.controlsHost = el(d, "div", { class: "controls" });

    const io = el(d, "details", { class: "io", open: "" });
    io.appendChild(el(d, "summary", {}, "melody / session JSON"));
    this.ioText = el(d, "textarea", { rows: "6", spellcheck: "false" });
    io.appendChild(this.ioText);
    const ioButtons = el(d, "div", { class: "io-buttons" });
    const loadBtn = el(d, "button", { "data-act": "load" }, "Load melody");
    loadBtn.addEventListener("click", () => this.loadMelodyText(this.ioText.value));
    const importBtn = el(d, "button", { "data-act": "import" }, "Import session");
    importBtn.addEventListener("click", () => this.importSessionText(this.ioText.value));
    const exportBtn = el(d, "button", { "data-act": "export" }, "Export session");
    exportBtn.addEventListener("click", () => {
      const text = this.exportSessionText();
      if (text !== null) this.ioText.value = text;
    });
    ioButtons.append(loadBtn, importBtn, exportBtn);
    io.appendChild(ioButtons);

    root.append(this.banner, this.status, io, this.controlsHost, this.rollHost, this.laneHost, this.pickerHost);
    this.render();
  }

  showError(message: string): void {
    this.banner.textContent = message;
    this.banner.removeAttribute("hidden");
  }

  clearError(): void {
    this.banner.textContent = "";
    this.banner.setAttribute("hidden", "");
  }

  // Start a fresh session from a lead sheet: melody on the roll, chord lane
  // empty and unpinned. A schema error leaves the current session alone.
  loadMelodyText(text: string): void {
    try {
      const doc = parseLeadSheet(text);
      const framed = frameMelody(doc);
      this.state = newSession(framed, this.deps.nDefault);
      this.loop = { startFrame: 0, endFrame: framed.numFrames };
      this.pickerFrame = null;
      this.clearError();
    } catch (e) {
      // LeadSheetFormatError messages already lead with the field path
      this.showError((e as Error).message);
    }
    this.render();
  }

  // Restore a full session (chords, pins, sampler settings) from an export.
  importSessionText(text: string): void {
    try {
      const doc = parseLeadSheet(text);
      this.state = importSession(doc, this.deps.nDefault);
      this.loop = { startFrame: 0, endFrame: this.state.framed.numFrames };
      this.pickerFrame = null;
      this.clearError();
    } catch (e) {
      this.showError((e as Error).message);
    }
    this.render();
  }

  exportSessionText(): string | null {
    if (!this.state) {
      this.showError("nothing to export: no melody loaded");
      return null;
    }
    return JSON.stringify(exportSession(this.state, this.deps.chordNames));
  }

  async resample(): Promise<void> {
    if (!this.state) {
      this.showError("load a melody first");
      return;
    }
    const snapshot = this.state;
    const req = buildHarmonizeRequest(snapshot);
    this.render();
    try {
      const resp = await this.queue.submit(req);
      if (!this.responseStillApplies(snapshot, req.pins)) {
        // the melody or a pin changed while the request was out; applying
        // the result could fight a pin the server never saw
        this.showError("result discarded: session changed while harmonizing");
        this.render();
        return;
      }
      this.state = applyHarmonizeResult(this.state!, resp);
      this.clearError();
    } catch (e) {
      if (e instanceof ApiError && e.detail === "superseded by a newer request") return;
      this.showError((e as Error).message);
    }
    this.render();
  }

  // A response may land on the current state only if the melody is the same
  // and the pin set still matches what the request carried.
  private responseStillApplies(snapshot: SessionState, pins: Record<string, number | string>): boolean {
    const s = this.state;
    if (!s || s.framed !== snapshot.framed) return false;
    for (let t = 0; t < s.pinned.length; t++) {
      const sent = pins[String(t)];
      if (s.pinned[t] ? sent !== s.chords[t] : sent !== undefined) return false;
    }
    return true;
  }

  doTogglePin(frame: number, chord?: number): void {
    if (!this.state) return;
    this.state = togglePin(this.state, frame, chord);
    this.render();
  }

  doUndo(): void {
    if (!this.state) return;
    this.state = undo(this.state);
    this.render();
  }

  openPicker(frame: number): void {
    this.pickerFrame = frame;
    this.render();
  }

  closePicker(): void {
    this.pickerFrame = null;
    this.render();
  }

  render(): void {
    this.renderControls();
    this.renderRoll();
    this.renderLane();
    this.renderPicker();
    const s = this.state;
    if (!s) {
      this.status.textContent = "no melody loaded";
      return;
    }
    const busy = this.queue.busy ? " | harmonizing..." : "";
    const seed = s.sampler.seed === null ? "none yet" : String(s.sampler.seed);
    this.status.textContent =
      `${s.framed.title} | ${s.framed.numFrames} half-bar frames | last seed: ${seed}${busy}`;
  }

  private renderControls(): void {
    const d = this.doc;
    this.controlsHost.textContent = "";
    if (!this.state) return;
    const s = this.state;

    const resampleBtn = el(d, "button", { "data-act": "resample" }, "Resample");
    resampleBtn.addEventListener("click", () => void this.resample());
    const undoBtn = el(d, "button", { "data-act": "undo" }, "Undo");
    if (!canUndo(s)) undoBtn.setAttribute("disabled", "");
    undoBtn.addEventListener("click", () => this.doUndo());

    const temp = el(d, "input", {
      type: "range", min: "0", max: "2", step: "0.05",
      value: String(s.sampler.temperature), "data-act": "temperature",
    });
    temp.addEventListener("input", () => {
      s.sampler.temperature = Number(temp.value);
      tempLabel.textContent = `temperature ${temp.value}`;
    });
    const tempLabel = el(d, "span", {}, `temperature ${s.sampler.temperature}`);

    const iters = el(d, "input", {
      type: "number", min: "1", max: "200",
      value: String(s.sampler.n), "data-act": "iterations",
    });
    iters.addEventListener("input", () => {
      const v = Math.floor(Number(iters.value));
      if (v >= 1) s.sampler.n = v;
    });

    const seedLock = el(d, "input", { type: "checkbox", "data-act": "seed-lock" });
    (seedLock as HTMLInputElement).checked = s.sampler.seedLock;
    seedLock.addEventListener("change", () => {
      s.sampler.seedLock = (seedLock as HTMLInputElement).checked;
    });

    const playBtn = el(d, "button", { "data-act": "play" }, "Play");
    const loopChk = el(d, "input", { type: "checkbox", "data-act": "loop" });
    const stopBtn = el(d, "button", { "data-act": "stop" }, "Stop");
    if (this.deps.player) {
      const player = this.deps.player;
      playBtn.addEventListener("click", () => {
        player.play(s, this.loop, (loopChk as HTMLInputElement).checked);
      });
      stopBtn.addEventListener("click", () => player.stop());
    } else {
      playBtn.setAttribute("disabled", "");
      stopBtn.setAttribute("disabled", "");
    }

    const loopStart = el(d, "input", {
      type: "number", min: "0", value: String(this.loop.startFrame), "data-act": "loop-start",
    });
    const loopEnd = el(d, "input", {
      type: "number", min: "1", value: String(this.loop.endFrame), "data-act": "loop-end",
    });
    const clampLoop = () => {
      const n = s.framed.numFrames;
      const a = Math.max(0, Math.min(n - 1, Math.floor(Number(loopStart.value)) || 0));
      const b = Math.max(a + 1, Math.min(n, Math.floor(Number(loopEnd.value)) || n));
      this.loop = { startFrame: a, endFrame: b };
    };
    loopStart.addEventListener("input", clampLoop);
    loopEnd.addEventListener("input", clampLoop);

    const row1 = el(d, "div", { class: "row" });
    row1.append(resampleBtn, undoBtn, tempLabel, temp, el(d, "span", {}, "iterations"), iters,
      el(d, "span", {}, "seed lock"), seedLock);
    const row2 = el(d, "div", { class: "row" });
    row2.append(playBtn, stopBtn, el(d, "span", {}, "loop"), loopChk,
      el(d, "span", {}, "region"), loopStart, loopEnd);
    if (!this.deps.player) {
      row2.append(el(d, "span", { class: "notice" }, "audio unavailable in this browser"));
    }
    this.controlsHost.append(row1, row2);
  }

  private renderRoll(): void {
    const d = this.doc;
    this.rollHost.textContent = "";
    if (!this.state) return;
    const { framed } = this.state;
    let lo = 127;
    let hi = 0;
    for (const n of framed.notes) {
      lo = Math.min(lo, n.midi);
      hi = Math.max(hi, n.midi);
    }
    if (framed.notes.length === 0) return;
    const cols = framed.numFrames;
    for (let midi = hi; midi >= lo; midi--) {
      const row = el(d, "div", { class: "roll-row", "data-midi": String(midi) });
      const cells: HTMLElement[] = [];
      for (let t = 0; t < cols; t++) {
        cells.push(el(d, "div", { class: "cell", "data-frame": String(t) }));
      }
      for (const note of framed.notes) {
        if (note.midi !== midi) continue;
        const startBeat = note.onset.n / note.onset.d;
        const endBeat = startBeat + note.duration.n / note.duration.d;
        const halfBar = framed.halfBar.n / framed.halfBar.d;
        const first = Math.floor(startBeat / halfBar);
        const last = Math.min(cols - 1, Math.ceil(endBeat / halfBar) - 1);
        for (let t = first; t <= last; t++) cells[t]!.classList.add("note");
      }
      for (const c of cells) row.appendChild(c);
      this.rollHost.appendChild(row);
    }
  }

  private renderLane(): void {
    const d = this.doc;
    this.laneHost.textContent = "";
    if (!this.state) return;
    const s = this.state;
    for (let t = 0; t < s.framed.numFrames; t++) {
      const chord = s.chords[t] ?? null;
      const cell = el(d, "div", {
        class: "chord-cell" + (s.pinned[t] ? " pinned" : ""),
        "data-frame": String(t),
      });
      const name = chord === null ? "·" : this.deps.chordNames[chord]!;
      const nameBtn = el(d, "button", { class: "chord-name", "data-act": "pick" }, name);
      nameBtn.addEventListener("click", () => this.openPicker(t));
      const conf = s.confidence[t];
      if (conf !== null && conf !== undefined && chord !== null) {
        cell.style.background = `rgba(80, 140, 220, ${(0.15 + 0.85 * conf).toFixed(3)})`;
        cell.title = `p = ${conf.toFixed(3)}`;
      }
      const pinBtn = el(d, "button", { class: "pin", "data-act": "pin" },
        s.pinned[t] ? "pinned" : "pin");
      if (chord === null) pinBtn.setAttribute("disabled", "");
      pinBtn.addEventListener("click", () => this.doTogglePin(t));
      cell.append(nameBtn, pinBtn);
      this.laneHost.appendChild(cell);
    }
  }

  // 96-entry picker, one group per quality, pinning the chosen chord at the
  // open frame. Labels come from the server's name list.
  private renderPicker(): void {
    const d = this.doc;
    this.pickerHost.textContent = "";
    if (this.pickerFrame === null || !this.state) {
      this.pickerHost.setAttribute("hidden", "");
      return;
    }
    this.pickerHost.removeAttribute("hidden");
    const frame = this.pickerFrame;
    this.pickerHost.appendChild(
      el(d, "div", { class: "picker-title" }, `pin a chord at frame ${frame}`),
    );
    for (let q = 0; q < NUM_QUALITIES; q++) {
      const group = el(d, "div", { class: "quality-group", "data-quality": String(q) });
      group.appendChild(el(d, "div", { class: "quality-label" }, QUALITY_LABELS[q]!));
      for (let idx = 0; idx < this.deps.chordNames.length; idx++) {
        if (chordQuality(idx) !== q) continue;
        const btn = el(d, "button", { "data-chord": String(idx) }, this.deps.chordNames[idx]!);
        btn.addEventListener("click", () => {
          this.doTogglePin(frame, idx);
          this.closePicker();
        });
        group.appendChild(btn);
      }
      this.pickerHost.appendChild(group);
    }
    const close = el(d, "button", { "data-act": "close-picker" }, "close");
    close.addEventListener("click", () => this.closePicker());
    this.pickerHost.appendChild(close);
  }
}
