// Browser entry point. Connects to the harmonization service (same origin
// under /api by default, override with ?api=http://host:port), checks that
// the model's vocabulary matches the client's table, and mounts the app.

import { ApiClient } from "./api";
import { allChordNames } from "./chords";
import { Player, WebAudioSink } from "./playback";
import { App } from "./ui";

function apiBase(): string {
  const param = new URLSearchParams(window.location.search).get("api");
  return param ?? "/api";
}

function makePlayer(): Player | null {
  const Ctx = window.AudioContext ?? (window as unknown as { webkitAudioContext?: typeof AudioContext }).webkitAudioContext;
  if (!Ctx) return null;
  return new Player(new WebAudioSink(new Ctx()));
}

async function boot(): Promise<void> {
  const rootEl = document.getElementById("app");
  if (!rootEl) throw new Error("missing #app mount point");
  const client = new ApiClient(apiBase());
  let info;
  try {
    info = await client.modelInfo();
  } catch (e) {
    rootEl.textContent = `cannot reach the harmonization service at ${apiBase()}: ${(e as Error).message}`;
    return;
  }
  const mirror = allChordNames();
  if (info.chord_names.some((name, i) => name !== mirror[i])) {
    rootEl.textContent = "the service's chord vocabulary does not match this client build";
    return;
  }
  const app = new App(rootEl, {
    client,
    chordNames: info.chord_names,
    nDefault: info.n_default,
    player: makePlayer(),
  });
  const player = app.deps.player;
  if (player) {
    player.onTick = (st) => {
      for (const cell of rootEl.querySelectorAll(".chord-cell")) {
        cell.classList.toggle(
          "playhead",
          st.playing && cell.getAttribute("data-frame") === String(st.playheadFrame),
        );
      }
    };
  }
}

void boot();
