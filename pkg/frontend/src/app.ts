/**
 * Browser wiring: object list, drag interaction, patch application, overlays.
 *
 * The client is a pure display: the frame starts from one /frame fetch and
 * afterwards changes only by applying service patches span by span.
 */

import {
  FrameBuffer,
  Patch,
  SceneInfo,
  Span,
  parseSpans,
} from "./protocol.js";
import { DragAction, DragController } from "./dragstate.js";

const SCALE = 8;

function $(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
}

async function fetchJSON<T>(path: string, body?: unknown): Promise<T> {
  const res = await fetch(path, {
    method: body === undefined ? "GET" : "POST",
    headers: body === undefined ? {} : { "Content-Type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const payload = await res.json();
  if (!res.ok) {
    const msg = payload?.error?.message ?? res.statusText;
    throw new Error(msg);
  }
  return payload as T;
}

async function decodePng(bytes: ArrayBuffer | Blob): Promise<ImageData> {
  const blob = bytes instanceof Blob ? bytes : new Blob([bytes], { type: "image/png" });
  const bitmap = await createImageBitmap(blob);
  const cnv = document.createElement("canvas");
  cnv.width = bitmap.width;
  cnv.height = bitmap.height;
  const ctx = cnv.getContext("2d")!;
  ctx.drawImage(bitmap, 0, 0);
  return ctx.getImageData(0, 0, bitmap.width, bitmap.height);
}

function base64ToBytes(b64: string): Uint8Array {
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

class Editor {
  private scene!: SceneInfo;
  private frame!: FrameBuffer;
  private selected: string | null = null;
  private drag = new DragController();
  private lastSpans: Span[] = [];
  private canvas = $("canvas") as HTMLCanvasElement;
  private overlay = $("overlay") as HTMLCanvasElement;
  private status = $("status");

  async start(): Promise<void> {
    this.scene = await fetchJSON<SceneInfo>("/scene");
    const { width, height } = this.scene;
    for (const cnv of [this.canvas, this.overlay]) {
      cnv.width = width;
      cnv.height = height;
      cnv.style.width = `${width * SCALE}px`;
      cnv.style.height = `${height * SCALE}px`;
    }
    const res = await fetch("/frame");
    const img = await decodePng(await res.blob());
    this.frame = new FrameBuffer(width, height, new Uint8ClampedArray(img.data));
    this.present();
    this.buildObjectList();
    this.wirePointer();
    this.say("ready — pick an object, then drag on the canvas");
    ($("show-update") as HTMLInputElement).onchange = () => this.drawOverlay();
    ($("show-stats") as HTMLInputElement).onchange = () => void this.refreshStats();
    void this.refreshStats();
  }

  private say(text: string): void {
    this.status.textContent = text;
  }

  private present(): void {
    const ctx = this.canvas.getContext("2d")!;
    ctx.putImageData(
      new ImageData(this.frame.data.slice(), this.frame.width, this.frame.height),
      0,
      0,
    );
  }

  private buildObjectList(): void {
    const list = $("objects");
    list.innerHTML = "";
    for (const obj of [...this.scene.objects].reverse()) {
      const li = document.createElement("li");
      li.textContent = `${obj.id} (${obj.kind})`;
      li.dataset.oid = obj.id;
      li.onclick = () => {
        this.selected = obj.id;
        for (const other of list.querySelectorAll("li")) {
          other.classList.toggle("selected", other === li);
        }
        this.say(`selected ${obj.id}`);
      };
      list.appendChild(li);
    }
  }

  private canvasPos(ev: PointerEvent): { x: number; y: number } {
    const r = this.canvas.getBoundingClientRect();
    return {
      x: Math.floor((ev.clientX - r.left) / SCALE),
      y: Math.floor((ev.clientY - r.top) / SCALE),
    };
  }

  private wirePointer(): void {
    this.canvas.style.touchAction = "none";
    this.canvas.addEventListener("pointerdown", (ev) => {
      if (!this.selected) {
        this.say("select an object first");
        return;
      }
      this.canvas.setPointerCapture(ev.pointerId);
      const p = this.canvasPos(ev);
      void this.run(this.drag.handle({ type: "down", ...p }));
    });
    this.canvas.addEventListener("pointermove", (ev) => {
      if (!this.drag.active) return;
      void this.run(this.drag.handle({ type: "move", ...this.canvasPos(ev) }));
    });
    this.canvas.addEventListener("pointerup", () => {
      void this.run(this.drag.handle({ type: "up" }));
    });
    window.addEventListener("keydown", (ev) => {
      if (ev.key === "Escape") void this.run(this.drag.handle({ type: "escape" }));
    });
  }

  private async run(actions: DragAction[]): Promise<void> {
    for (const action of actions) {
      try {
        await this.execute(action);
      } catch (err) {
        this.say(`service rejected ${action.kind}: ${err}`);
      }
      void this.run(this.drag.handle({ type: "ack" }));
    }
  }

  private async execute(action: DragAction): Promise<void> {
    switch (action.kind) {
      case "begin":
        await fetchJSON("/session/begin", { target: this.selected });
        this.say(`dragging ${this.selected} — release commits, Escape abandons`);
        return;
      case "preview": {
        const patch = await fetchJSON<Patch>("/session/preview", {
          op: { kind: "translate", dx: action.dx, dy: action.dy, target: this.selected },
        });
        await this.applyPatch(patch);
        return;
      }
      case "commit":
        await fetchJSON("/session/commit", {});
        this.say("committed");
        void this.refreshStats();
        return;
      case "abandon": {
        const patch = await fetchJSON<Patch>("/session/abandon", {});
        await this.applyPatch(patch);
        this.say("abandoned — frame restored");
        return;
      }
    }
  }

  private async applyPatch(patch: Patch): Promise<void> {
    const up = patch.update;
    if (!up.bbox || !up.png) return;
    const img = await decodePng(base64ToBytes(up.png).buffer as ArrayBuffer);
    this.lastSpans = parseSpans(up.spans);
    this.frame.applyPatch(this.lastSpans, up.bbox, new Uint8ClampedArray(img.data));
    this.present();
    this.drawOverlay();
    this.say(`patched ${up.area} px`);
  }

  private drawOverlay(): void {
    const ctx = this.overlay.getContext("2d")!;
    ctx.clearRect(0, 0, this.overlay.width, this.overlay.height);
    const show = ($("show-update") as HTMLInputElement).checked;
    if (!show) return;
    ctx.fillStyle = "rgba(255, 64, 192, 0.45)";
    for (const s of this.lastSpans) {
      ctx.fillRect(s.x0, s.y, s.x1 - s.x0 + 1, 1);
    }
  }

  private async refreshStats(): Promise<void> {
    const show = ($("show-stats") as HTMLInputElement).checked;
    $("stats").style.display = show ? "" : "none";
    $("stats-title").style.display = show ? "" : "none";
    if (!show) return;
    const stats = await fetchJSON<{
      cumulative: { objects: Record<string, Record<string, number>> };
    }>("/stats");
    const rows = Object.entries(stats.cumulative.objects)
      .map(([oid, d]) => `${oid}: ${d.rasterized_pixels ?? 0}px`)
      .join("  ·  ");
    $("stats").textContent = rows;
  }
}

window.addEventListener("DOMContentLoaded", () => {
  new Editor().start().catch((err) => {
    const status = document.getElementById("status");
    if (status) status.textContent = `failed to load scene: ${err}`;
  });
});
