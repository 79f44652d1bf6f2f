/**
 * Press-duration to query-variance mapping.
 *
 * Holding a point longer means more confidence, so the variance shrinks
 * linearly from C_MAX (instant tap) down to C_MIN (a hold of SATURATION_MS
 * or longer). The constants mirror the server's Gaussian query defaults.
 */
export const C_MIN = 0.01;
export const C_MAX = 0.25;
export const SATURATION_MS = 2000;

export function pressToVariance(durationMs: number): number {
  if (!Number.isFinite(durationMs) || durationMs < 0) {
    throw new RangeError(`press duration must be >= 0, got ${durationMs}`);
  }
  const t = durationMs / SATURATION_MS;
  if (t >= 1) return C_MIN;
  return C_MAX - (C_MAX - C_MIN) * t;
}

export interface PressTracker {
  start(atMs: number): void;
  /** Returns the derived variance for the completed press. */
  end(atMs: number): number;
  active(): boolean;
}

/** Tracks one press at a time; ends that never saw a start are taps. */
export function makePressTracker(): PressTracker {
  let startedAt: number | null = null;
  return {
    start(atMs: number) {
      startedAt = atMs;
    },
    end(atMs: number): number {
      if (startedAt === null) return pressToVariance(0);
      const duration = Math.max(0, atMs - startedAt);
      startedAt = null;
      return pressToVariance(duration);
    },
    active: () => startedAt !== null,
  };
}
