/** Symmetric 2x2 covariance as its three free entries. */
export interface Cov {
  s11: number;
  s12: number;
  s22: number;
}

export const MIN_EIGENVALUE = 1e-4;

export function isoCov(variance: number): Cov {
  return { s11: variance, s12: 0, s22: variance };
}

/** Eigendecomposition of a symmetric 2x2 matrix. */
export function eig2(c: Cov): { values: [number, number]; angle: number } {
  const tr = c.s11 + c.s22;
  const det = c.s11 * c.s22 - c.s12 * c.s12;
  const disc = Math.sqrt(Math.max(0, (tr * tr) / 4 - det));
  const l1 = tr / 2 + disc;
  const l2 = tr / 2 - disc;
  // eigenvector angle of the larger eigenvalue
  const angle =
    Math.abs(c.s12) < 1e-15 && c.s11 >= c.s22
      ? 0
      : Math.abs(c.s12) < 1e-15
        ? Math.PI / 2
        : Math.atan2(l1 - c.s11, c.s12);
  return { values: [l1, l2], angle };
}

/**
 * Project onto the positive-definite cone: eigenvalues below
 * MIN_EIGENVALUE are raised to it, the eigenbasis is kept.
 */
export function clampPD(c: Cov): Cov {
  const { values, angle } = eig2(c);
  if (values[0] >= MIN_EIGENVALUE && values[1] >= MIN_EIGENVALUE) return c;
  const l1 = Math.max(values[0], MIN_EIGENVALUE);
  const l2 = Math.max(values[1], MIN_EIGENVALUE);
  const co = Math.cos(angle);
  const si = Math.sin(angle);
  return {
    s11: l1 * co * co + l2 * si * si,
    s12: (l1 - l2) * co * si,
    s22: l1 * si * si + l2 * co * co,
  };
}

export function isPD(c: Cov): boolean {
  return c.s11 > 0 && c.s11 * c.s22 - c.s12 * c.s12 > 0;
}

/**
 * One pinch step: scale the covariance by `factor` along direction
 * `angle` (radians) and by 1 along the orthogonal one. The result is
 * always clamped back into the PD cone, so arbitrary gesture streams
 * (factor 0 included) stay submittable.
 */
export function applyPinch(c: Cov, factor: number, angle: number): Cov {
  if (!Number.isFinite(factor) || factor < 0) factor = 1;
  const co = Math.cos(angle);
  const si = Math.sin(angle);
  // S = R diag(factor, 1) R^T, then S C S^T
  const s = [
    factor * co * co + si * si,
    (factor - 1) * co * si,
    factor * si * si + co * co,
  ];
  const a = s[0] * c.s11 + s[1] * c.s12;
  const b = s[0] * c.s12 + s[1] * c.s22;
  const d = s[1] * c.s11 + s[2] * c.s12;
  const e = s[1] * c.s12 + s[2] * c.s22;
  return clampPD({
    s11: a * s[0] + b * s[1],
    s12: a * s[1] + b * s[2],
    s22: d * s[1] + e * s[2],
  });
}

/** 1-sigma ellipse geometry for canvas rendering. */
export function ellipseOf(c: Cov): { rx: number; ry: number; angle: number } {
  const { values, angle } = eig2(clampPD(c));
  return { rx: Math.sqrt(values[0]), ry: Math.sqrt(values[1]), angle };
}
