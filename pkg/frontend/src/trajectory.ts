import { C_MIN, C_MAX } from "./pressGesture";

export interface PathSample {
  v: number;
  a: number;
  tMs: number;
}

export interface TrajectoryQuery {
  v: number;
  a: number;
  variance: number;
}

// speed (VA units per second) at which confidence bottoms out
const SPEED_FLOOR = 0.05;
const SPEED_CEIL = 2.0;

/**
 * Turn a drawn path into an ordered sequence of point queries whose
 * variance tracks the drawing speed: slow, deliberate strokes produce
 * confident (small-variance) queries, fast sweeps vague ones.
 */
export function sampleTrajectory(
  path: PathSample[],
  stepMs = 250,
): TrajectoryQuery[] {
  if (path.length === 0) return [];
  if (path.length === 1) {
    return [{ v: clamp1(path[0].v), a: clamp1(path[0].a), variance: C_MAX }];
  }
  const out: TrajectoryQuery[] = [];
  let nextEmit = path[0].tMs;
  for (let i = 1; i < path.length; i++) {
    const prev = path[i - 1];
    const cur = path[i];
    if (cur.tMs < nextEmit) continue;
    const dt = Math.max(1, cur.tMs - prev.tMs) / 1000;
    const speed = Math.hypot(cur.v - prev.v, cur.a - prev.a) / dt;
    out.push({ v: clamp1(cur.v), a: clamp1(cur.a), variance: speedToVariance(speed) });
    nextEmit = cur.tMs + stepMs;
  }
  if (out.length === 0) {
    const last = path[path.length - 1];
    out.push({ v: clamp1(last.v), a: clamp1(last.a), variance: C_MAX });
  }
  return out;
}

export function speedToVariance(speed: number): number {
  const s = Math.min(Math.max(speed, SPEED_FLOOR), SPEED_CEIL);
  const t = (s - SPEED_FLOOR) / (SPEED_CEIL - SPEED_FLOOR);
  return C_MIN + (C_MAX - C_MIN) * t;
}

function clamp1(x: number): number {
  return Math.min(1, Math.max(-1, x));
}
