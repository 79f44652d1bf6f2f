import type { RetrievedClip } from "./api";
import { ellipseOf, type Cov } from "./covariance";

/** The 2D-context subset the canvas layer uses; fakeable in tests. */
export interface DrawCtx {
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  ellipse(
    x: number,
    y: number,
    rx: number,
    ry: number,
    rotation: number,
    start: number,
    end: number,
  ): void;
  arc(x: number, y: number, r: number, start: number, end: number): void;
  stroke(): void;
  fill(): void;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
}

export interface VaView {
  width: number;
  height: number;
}

// valence right, arousal up
export function toCanvas(view: VaView, v: number, a: number): [number, number] {
  return [((v + 1) / 2) * view.width, (1 - (a + 1) / 2) * view.height];
}

function strokeEllipse(
  ctx: DrawCtx,
  view: VaView,
  mean: [number, number],
  cov: Cov,
  style: string,
  width: number,
) {
  const { rx, ry, angle } = ellipseOf(cov);
  const [cx, cy] = toCanvas(view, mean[0], mean[1]);
  ctx.strokeStyle = style;
  ctx.lineWidth = width;
  ctx.beginPath();
  // canvas y grows downward, so the rotation flips sign
  ctx.ellipse(cx, cy, (rx / 2) * view.width, (ry / 2) * view.height, -angle, 0, 2 * Math.PI);
  ctx.stroke();
}

export interface Scene {
  query: { mean: [number, number]; cov: Cov } | null;
  results: RetrievedClip[];
}

export function drawScene(ctx: DrawCtx, view: VaView, scene: Scene): void {
  ctx.clearRect(0, 0, view.width, view.height);
  ctx.strokeStyle = "#ccc";
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.moveTo(view.width / 2, 0);
  ctx.lineTo(view.width / 2, view.height);
  ctx.moveTo(0, view.height / 2);
  ctx.lineTo(view.width, view.height / 2);
  ctx.stroke();

  for (const clip of scene.results) {
    const cov: Cov = { s11: clip.cov[0], s12: clip.cov[1], s22: clip.cov[2] };
    strokeEllipse(ctx, view, clip.mean, cov, "#4a90d9", 1);
    const [px, py] = toCanvas(view, clip.mean[0], clip.mean[1]);
    ctx.fillStyle = "#4a90d9";
    ctx.beginPath();
    ctx.arc(px, py, 2, 0, 2 * Math.PI);
    ctx.fill();
  }
  if (scene.query) {
    strokeEllipse(ctx, view, scene.query.mean, scene.query.cov, "#d94a4a", 2);
  }
}

/**
 * Fill the results panel: one row per clip with rank, id, and score.
 * Rows are buttons so a result can seed the next query (the caller
 * re-centers on the clicked clip's mean).
 */
export function renderResults(
  panel: HTMLElement,
  results: RetrievedClip[],
  onPick: (clip: RetrievedClip) => void,
): void {
  const doc = panel.ownerDocument;
  panel.textContent = "";
  if (results.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "empty";
    empty.textContent = "No results.";
    panel.appendChild(empty);
    return;
  }
  const list = doc.createElement("ol");
  list.className = "results";
  results.forEach((clip) => {
    const item = doc.createElement("li");
    const btn = doc.createElement("button");
    btn.type = "button";
    btn.dataset.clipId = clip.clip_id;
    const id = doc.createElement("span");
    id.className = "clip-id";
    id.textContent = clip.clip_id;
    const score = doc.createElement("span");
    score.className = "score";
    score.textContent = clip.score.toFixed(4);
    btn.appendChild(id);
    btn.appendChild(score);
    btn.addEventListener("click", () => onPick(clip));
    item.appendChild(btn);
    list.appendChild(item);
  });
  panel.appendChild(list);
}

export function renderError(panel: HTMLElement, code: string, message: string,
                            onRetry: () => void): void {
  const doc = panel.ownerDocument;
  panel.textContent = "";
  const box = doc.createElement("div");
  box.className = "error";
  const text = doc.createElement("p");
  text.textContent = `[${code}] ${message}`;
  const retry = doc.createElement("button");
  retry.type = "button";
  retry.textContent = "Retry";
  retry.addEventListener("click", onRetry);
  box.appendChild(text);
  box.appendChild(retry);
  panel.appendChild(box);
}
