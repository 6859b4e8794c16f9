/** Application shell: viewport + panel wiring over the session socket.
 *
 * The panel shows at most three retrieval candidates at a time, the
 * parameter panel is collapsible, and every state change round-trips
 * through the server; the only local state is the camera and the most
 * recently decoded frame.
 */

import { OrbitCamera } from "./camera.js";
import { GestureController, MODES, type Mode } from "./gestures.js";
import { FpsTracker, ViewportRenderer } from "./render.js";
import { fetchStyles, SessionSocket, type SocketLike, type StyleInfo } from "./net.js";
import {
  chat, requestRender, selectStyle, setParams, setStride, simControl, wind,
  type CandidateEntry, type Command, type FrameData, type ServerEvent,
} from "./protocol.js";

/** Candidate cards are capped at three, best first. */
export function topCandidates<T>(entries: readonly T[]): T[] {
  return entries.slice(0, 3);
}

export interface ServerBases {
  http: string;
  ws: string;
}

/** Resolve the backend from a ?server=host:port query, else the default
 * local port. */
export function serverBases(search: string, fallback = "127.0.0.1:8787"): ServerBases {
  let host = fallback;
  const q = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const given = q.get("server");
  if (given) host = given.replace(/^(https?|wss?):\/\//, "").replace(/\/+$/, "");
  return { http: `http://${host}`, ws: `ws://${host}/ws` };
}

/** Numeric fields mirrored into the parameter panel. */
export const PARAM_FIELDS: readonly { name: string; step: number }[] = [
  { name: "k_edge", step: 1000 },
  { name: "k_bend", step: 100 },
  { name: "k_aug_local", step: 100 },
  { name: "k_aug_global", step: 100 },
  { name: "biphasic_ratio", step: 0.5 },
  { name: "grid_blend", step: 0.05 },
  { name: "substeps", step: 1 },
];

export interface AppOptions {
  serverBases?: ServerBases;
  socketFactory?: (url: string) => SocketLike;
}

export interface AppHandles {
  camera: OrbitCamera;
  gestures: GestureController;
  socket: SessionSocket;
  destroy(): void;
}

type Attrs = Record<string, string | ((ev: Event) => void)>;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Attrs = {}, ...children: (Node | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key, value);
    } else if (key === "class") {
      node.className = value;
    } else {
      node.setAttribute(key, value);
    }
  }
  node.append(...children);
  return node;
}

export function buildApp(root: HTMLElement, opts: AppOptions = {}): AppHandles {
  const bases = opts.serverBases ?? serverBases(location.search);
  const camera = new OrbitCamera();
  const gestures = new GestureController(camera);
  const renderer = new ViewportRenderer();
  const fps = new FpsTracker();

  let frame: FrameData | null = null;
  let raf = 0;

  // -- viewport ----------------------------------------------------------
  const canvas = el("canvas", { class: "hf-canvas" });
  const hud = el("div", { class: "hf-hud" }, "connecting");
  const banner = el("div", { class: "hf-banner hf-hidden" });
  const viewport = el("div", { class: "hf-viewport" }, canvas, hud, banner);

  // -- panel: connection + toolbar ----------------------------------------
  const status = el("span", { class: "hf-dot hf-dot-wait" });
  const modeButtons = new Map<Mode, HTMLButtonElement>();
  const toolbar = el("div", { class: "hf-toolbar" });
  for (const mode of MODES) {
    const btn = el("button", {
      class: mode === gestures.mode ? "hf-active" : "",
      click: () => {
        for (const cmd of gestures.setMode(mode)) send(cmd);
        for (const [m, b] of modeButtons) b.classList.toggle("hf-active", m === mode);
      },
    }, mode);
    modeButtons.set(mode, btn);
    toolbar.append(btn);
  }
  const strideSel = el("select", {
    change: () => send(setStride(Number(strideSel.value))),
  }, ...["1", "2", "4", "8"].map((v) => el("option", { value: v }, `stride ${v}`)));
  let running = true;
  const pauseBtn = el("button", {
    click: () => send(simControl({ running: !running })),
  }, "pause");
  const resetBtn = el("button", {
    click: () => send(simControl({ reset: true })),
  }, "reset");
  toolbar.append(strideSel, pauseBtn, resetBtn);

  // -- panel: styles -------------------------------------------------------
  const styleGrid = el("div", { class: "hf-styles" });

  // -- panel: chat + candidates --------------------------------------------
  const transcript = el("div", { class: "hf-transcript" });
  const cards = el("div", { class: "hf-cards" });
  const chatInput = el("input", {
    type: "text", placeholder: "describe a style, wind, render…",
  });
  const chatForm = el("form", {
    class: "hf-chatform",
    submit: (ev: Event) => {
      ev.preventDefault();
      const text = chatInput.value.trim();
      if (!text) return;
      say(`you: ${text}`);
      send(chat(text));
      chatInput.value = "";
    },
  }, chatInput, el("button", { type: "submit" }, "send"));

  // -- panel: parameters (collapsible) --------------------------------------
  const paramInputs = new Map<string, HTMLInputElement>();
  const paramRows = PARAM_FIELDS.map(({ name, step }) => {
    const input = el("input", { type: "number", step: String(step), name });
    paramInputs.set(name, input);
    return el("label", { class: "hf-row" }, name, input);
  });
  const windStrength = el("input", {
    type: "number", step: "10", value: "0", name: "wind_strength",
  });
  const windAngle = el("input", {
    type: "number", step: "15", value: "0", name: "wind_angle",
  });
  const params = el("details", { class: "hf-params" },
    el("summary", {}, "parameters"),
    ...paramRows,
    el("button", {
      click: () => {
        const out: Record<string, number> = {};
        for (const [name, input] of paramInputs) {
          if (input.value !== "") out[name] = Number(input.value);
        }
        if (Object.keys(out).length) send(setParams(out));
      },
    }, "apply"),
    el("label", { class: "hf-row" }, "wind cm/s", windStrength),
    el("label", { class: "hf-row" }, "wind deg", windAngle),
    el("button", {
      click: () => {
        const a = (Number(windAngle.value) * Math.PI) / 180;
        send(wind([Math.cos(a), 0, Math.sin(a)], Math.max(0, Number(windStrength.value)),
          { gustAmplitude: 0.3, gustFrequency: 0.5 }));
      },
    }, "blow"),
  );

  // -- panel: renders (collapsible) ------------------------------------------
  const renderOut = el("div", { class: "hf-renders" });
  const attrInputs = new Map<string, HTMLInputElement>();
  const attrRows = ["gender", "hair_color", "head_pose", "misc"].map((name) => {
    const input = el("input", { type: "text", name });
    attrInputs.set(name, input);
    return el("label", { class: "hf-row" }, name.replace("_", " "), input);
  });
  const seedInput = el("input", { type: "number", value: "0", step: "1" });
  const renders = el("details", { class: "hf-render" },
    el("summary", {}, "renders"),
    ...attrRows,
    el("label", { class: "hf-row" }, "seed", seedInput),
    el("button", {
      click: () => {
        const attrs: Record<string, string> = {};
        for (const [name, input] of attrInputs) {
          if (input.value.trim()) attrs[name] = input.value.trim();
        }
        send(requestRender(attrs, Number(seedInput.value) || 0));
        say("render requested");
      },
    }, "render"),
    renderOut,
  );

  const panel = el("div", { class: "hf-panel" },
    el("div", { class: "hf-conn" }, status, ` ${bases.http}`),
    toolbar, styleGrid, transcript, cards, chatForm, params, renders);
  root.append(el("div", { class: "hf-app" }, viewport, panel));

  // -- behavior ---------------------------------------------------------------
  function say(line: string): void {
    transcript.append(el("div", {}, line));
    transcript.scrollTop = transcript.scrollHeight;
  }

  function flashBanner(text: string): void {
    banner.textContent = text;
    banner.classList.remove("hf-hidden");
  }

  function showCandidates(entries: CandidateEntry[]): void {
    cards.replaceChildren();
    for (const entry of topCandidates(entries)) {
      const img = el("img", { alt: entry.id });
      if (entry.thumbnail) img.src = bases.http + entry.thumbnail;
      cards.append(el("button", {
        class: "hf-card",
        click: () => {
          send(selectStyle(entry.id));
          say(`selected ${entry.id}`);
        },
      }, img, el("span", {}, `${entry.id} ${entry.score.toFixed(2)}`)));
    }
  }

  function onEvent(ev: ServerEvent): void {
    switch (ev.event) {
      case "candidates":
        showCandidates((ev.candidates as CandidateEntry[]) ?? []);
        say(`${topCandidates((ev.candidates as unknown[]) ?? []).length} candidates`);
        break;
      case "sim_status": {
        running = Boolean(ev.running);
        pauseBtn.textContent = running ? "pause" : "resume";
        break;
      }
      case "ack":
        say(`· ${String(ev.command)}`);
        break;
      case "error":
        say(`! ${String(ev.code)}: ${String(ev.message)}`);
        flashBanner(String(ev.code));
        setTimeout(() => banner.classList.add("hf-hidden"), 1500);
        break;
      case "render_progress":
        say(`render ${String(ev.render_id)}: ${String(ev.stage)}`);
        break;
      case "render_done": {
        const img = el("img", { class: "hf-renderimg", alt: `render ${String(ev.render_id)}` });
        img.src = `data:image/png;base64,${String(ev.png_base64)}`;
        renderOut.prepend(img);
        say(`render ${String(ev.render_id)} done in ${Number(ev.latency_s).toFixed(2)}s`);
        break;
      }
      default:
        break;
    }
  }

  const socket = new SessionSocket(bases.ws, {
    onEvent,
    onFrame: (fd) => { frame = fd; },
    onStatus: (st, detail) => {
      status.className = `hf-dot hf-dot-${st === "open" ? "ok" : st === "connecting" ? "wait" : "down"}`;
      if (st === "open") banner.classList.add("hf-hidden");
      else flashBanner(detail ? `${st}: ${detail}` : st);
    },
    onProtocolError: (kind, detail) => {
      // Malformed inbound data is logged and dropped; the page lives on.
      console.warn(`protocol: ${kind}: ${detail}`);
    },
  }, { socketFactory: opts.socketFactory });

  function send(cmd: Command): void {
    if (!socket.send(cmd)) flashBanner("not connected");
  }

  fetchStyles(bases.http).then((styles: StyleInfo[]) => {
    for (const s of styles) {
      const img = el("img", { alt: s.id, loading: "lazy" });
      img.src = bases.http + s.thumbnail;
      styleGrid.append(el("button", {
        class: "hf-card",
        click: () => {
          send(selectStyle(s.id));
          say(`selected ${s.id}`);
        },
      }, img, el("span", {}, s.id)));
    }
  }).catch((err: unknown) => flashBanner(`styles unavailable: ${String(err)}`));

  // Pointer plumbing: gestures own the interpretation.
  canvas.addEventListener("pointerdown", (ev) => {
    canvas.setPointerCapture(ev.pointerId);
    for (const cmd of gestures.pointerDown(ev.offsetX, ev.offsetY)) send(cmd);
  });
  canvas.addEventListener("pointermove", (ev) => {
    for (const cmd of gestures.pointerMove(ev.offsetX, ev.offsetY)) send(cmd);
  });
  canvas.addEventListener("pointerup", (ev) => {
    for (const cmd of gestures.pointerUp(ev.offsetX, ev.offsetY)) send(cmd);
  });
  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    gestures.wheel(ev.deltaY);
  }, { passive: false });

  function fit(): void {
    const rect = viewport.getBoundingClientRect();
    const dpr = window.devicePixelRatio || 1;
    canvas.width = Math.max(1, Math.floor(rect.width * dpr));
    canvas.height = Math.max(1, Math.floor(rect.height * dpr));
    canvas.style.width = `${rect.width}px`;
    canvas.style.height = `${rect.height}px`;
    camera.resize(canvas.width, canvas.height);
  }
  window.addEventListener("resize", fit);
  fit();

  const ctx = canvas.getContext("2d");
  function paint(now: number): void {
    raf = requestAnimationFrame(paint);
    if (!ctx) return;
    renderer.draw(ctx, camera, frame);
    const f = fps.tick(now);
    const verts = frame ? frame.vertexTotal : 0;
    const strands = frame ? frame.strands.length : 0;
    hud.textContent = `${f} fps · ${strands} strands · ${verts} vertices`;
  }
  raf = requestAnimationFrame(paint);

  return {
    camera,
    gestures,
    socket,
    destroy() {
      cancelAnimationFrame(raf);
      window.removeEventListener("resize", fit);
      socket.close();
    },
  };
}
