import { AegClient, RetrievalError, gaussianQuery, type Method, type RetrievedClip } from "./api";
import { clampPD, isoCov, applyPinch, type Cov } from "./covariance";
import { makePressTracker, C_MAX } from "./pressGesture";
import { drawScene, renderError, renderResults, type VaView } from "./render";
import { sampleTrajectory, type PathSample } from "./trajectory";

interface UiQueryState {
  v: number;
  a: number;
  cov: Cov;
  method: Method;
  topk: number;
  userId?: string;
}

export function mount(root: Document = document): void {
  const canvas = root.getElementById("va-canvas") as HTMLCanvasElement;
  const panel = root.getElementById("results") as HTMLElement;
  const methodSel = root.getElementById("method") as HTMLSelectElement;
  const topkInput = root.getElementById("topk") as HTMLInputElement;
  const userInput = root.getElementById("user") as HTMLInputElement;
  const modeToggle = root.getElementById("trajectory-mode") as HTMLInputElement;
  const readout = root.getElementById("readout") as HTMLElement;

  const maybeCtx = canvas.getContext("2d");
  if (!maybeCtx) throw new Error("canvas 2d context unavailable");
  const ctx: CanvasRenderingContext2D = maybeCtx;
  const view: VaView = { width: canvas.width, height: canvas.height };
  const client = new AegClient("");

  const state: UiQueryState = {
    v: 0,
    a: 0,
    cov: isoCov(C_MAX),
    method: "ensemble",
    topk: 10,
  };
  let results: RetrievedClip[] = [];
  let hasQuery = false;

  const press = makePressTracker();
  let path: PathSample[] = [];
  const pointers = new Map<number, { x: number; y: number }>();
  let pinchStart: { dist: number; angle: number; cov: Cov } | null = null;

  function fromCanvas(ev: PointerEvent): [number, number] {
    const rect = canvas.getBoundingClientRect();
    const x = ((ev.clientX - rect.left) / rect.width) * 2 - 1;
    const y = (1 - (ev.clientY - rect.top) / rect.height) * 2 - 1;
    return [Math.min(1, Math.max(-1, x)), Math.min(1, Math.max(-1, y))];
  }

  function redraw() {
    drawScene(ctx, view, {
      query: hasQuery ? { mean: [state.v, state.a], cov: state.cov } : null,
      results,
    });
    readout.textContent = hasQuery
      ? `v=${state.v.toFixed(2)} a=${state.a.toFixed(2)} ` +
        `s11=${state.cov.s11.toFixed(3)} s12=${state.cov.s12.toFixed(3)} ` +
        `s22=${state.cov.s22.toFixed(3)}`
      : "press the plane to query";
  }

  async function submit() {
    state.method = methodSel.value as Method;
    state.topk = Math.max(1, Number(topkInput.value) || 10);
    state.userId = userInput.value.trim() || undefined;
    try {
      const resp = await client.retrieve(
        gaussianQuery(state.v, state.a, clampPD(state.cov)),
        { method: state.method, topk: state.topk, userId: state.userId },
      );
      results = resp.results;
      renderResults(panel, results, (clip) => {
        // a picked result seeds the next query at that clip's emotion
        state.v = clip.mean[0];
        state.a = clip.mean[1];
        state.cov = clampPD({ s11: clip.cov[0], s12: clip.cov[1], s22: clip.cov[2] });
        hasQuery = true;
        redraw();
        void submit();
      });
      redraw();
    } catch (err) {
      if ((err as Error).name === "AbortError") return;
      if (err instanceof RetrievalError) {
        renderError(panel, err.code, err.message, () => void submit());
      } else {
        renderError(panel, "NetworkError", String(err), () => void submit());
      }
    }
  }

  canvas.addEventListener("pointerdown", (ev) => {
    pointers.set(ev.pointerId, { x: ev.clientX, y: ev.clientY });
    if (pointers.size === 2) {
      const [p1, p2] = [...pointers.values()];
      pinchStart = {
        dist: Math.hypot(p2.x - p1.x, p2.y - p1.y),
        angle: Math.atan2(p2.y - p1.y, p2.x - p1.x),
        cov: state.cov,
      };
      return;
    }
    if (modeToggle.checked) {
      path = [{ v: fromCanvas(ev)[0], a: fromCanvas(ev)[1], tMs: ev.timeStamp }];
    } else {
      press.start(ev.timeStamp);
      [state.v, state.a] = fromCanvas(ev);
      hasQuery = true;
      redraw();
    }
  });

  canvas.addEventListener("pointermove", (ev) => {
    if (pointers.has(ev.pointerId)) {
      pointers.set(ev.pointerId, { x: ev.clientX, y: ev.clientY });
    }
    if (pinchStart && pointers.size === 2) {
      const [p1, p2] = [...pointers.values()];
      const dist = Math.hypot(p2.x - p1.x, p2.y - p1.y);
      const angle = Math.atan2(p2.y - p1.y, p2.x - p1.x);
      state.cov = applyPinch(pinchStart.cov, dist / pinchStart.dist, angle);
      redraw();
      return;
    }
    if (modeToggle.checked && path.length > 0) {
      const [v, a] = fromCanvas(ev);
      path.push({ v, a, tMs: ev.timeStamp });
    }
  });

  canvas.addEventListener("pointerup", (ev) => {
    pointers.delete(ev.pointerId);
    if (pinchStart) {
      if (pointers.size < 2) pinchStart = null;
      void submit();
      return;
    }
    if (modeToggle.checked && path.length > 0) {
      const steps = sampleTrajectory(path);
      path = [];
      void (async () => {
        for (const step of steps) {
          state.v = step.v;
          state.a = step.a;
          state.cov = isoCov(step.variance);
          hasQuery = true;
          redraw();
          await submit();
        }
      })();
      return;
    }
    if (press.active()) {
      const variance = press.end(ev.timeStamp);
      state.cov = isoCov(variance);
      redraw();
      void submit();
    }
  });

  canvas.addEventListener("pointercancel", (ev) => {
    pointers.delete(ev.pointerId);
    if (pointers.size < 2) pinchStart = null;
  });

  // mouse fallback for pinch: wheel scales the ellipse isotropically
  canvas.addEventListener("wheel", (ev) => {
    if (!hasQuery) return;
    ev.preventDefault();
    const factor = ev.deltaY < 0 ? 0.9 : 1.1;
    state.cov = applyPinch(state.cov, factor, 0);
    state.cov = applyPinch(state.cov, factor, Math.PI / 2);
    redraw();
  });

  methodSel.addEventListener("change", () => hasQuery && void submit());
  redraw();
}

if (typeof document !== "undefined" && document.getElementById("va-canvas")) {
  mount(document);
}
