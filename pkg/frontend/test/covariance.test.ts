import { describe, expect, it } from "vitest";
import fc from "fast-check";
import {
  MIN_EIGENVALUE,
  applyPinch,
  clampPD,
  eig2,
  ellipseOf,
  isPD,
  isoCov,
  type Cov,
} from "../src/covariance";

function eigMin(c: Cov): number {
  return eig2(c).values[1];
}

describe("eig2", () => {
  it("diagonal matrices decompose exactly", () => {
    const { values, angle } = eig2({ s11: 4, s12: 0, s22: 1 });
    expect(values[0]).toBeCloseTo(4, 12);
    expect(values[1]).toBeCloseTo(1, 12);
    expect(angle).toBe(0);
  });

  it("recovers a known rotated pair", () => {
    // eigenvalues 3 and 1 at 45 degrees
    const c: Cov = { s11: 2, s12: 1, s22: 2 };
    const { values, angle } = eig2(c);
    expect(values[0]).toBeCloseTo(3, 12);
    expect(values[1]).toBeCloseTo(1, 12);
    expect(Math.abs(Math.cos(angle))).toBeCloseTo(Math.SQRT1_2, 12);
  });
});

describe("clampPD", () => {
  it("leaves PD matrices untouched", () => {
    const c = isoCov(0.04);
    expect(clampPD(c)).toBe(c);
  });

  it("lifts a singular matrix onto the PD floor", () => {
    const fixed = clampPD({ s11: 0.01, s12: 0.01, s22: 0.01 });
    expect(isPD(fixed)).toBe(true);
    expect(eigMin(fixed)).toBeGreaterThanOrEqual(MIN_EIGENVALUE * (1 - 1e-9));
  });

  it("repairs negative-definite input", () => {
    const fixed = clampPD({ s11: -0.5, s12: 0.2, s22: -0.3 });
    expect(isPD(fixed)).toBe(true);
  });
});

describe("applyPinch", () => {
  it("doubling along the x axis scales s11 by 4", () => {
    const out = applyPinch(isoCov(0.05), 2, 0);
    expect(out.s11).toBeCloseTo(0.2, 12);
    expect(out.s22).toBeCloseTo(0.05, 12);
    expect(out.s12).toBeCloseTo(0, 12);
  });

  it("a factor-zero pinch still yields a PD covariance", () => {
    const out = applyPinch(isoCov(0.25), 0, 1.1);
    expect(isPD(out)).toBe(true);
    expect(eigMin(out)).toBeGreaterThanOrEqual(MIN_EIGENVALUE * (1 - 1e-9));
  });

  it("every gesture stream keeps the covariance PD", () => {
    fc.assert(
      fc.property(
        fc.array(
          fc.record({
            factor: fc.double({ min: 0, max: 8, noNaN: true }),
            angle: fc.double({ min: -Math.PI, max: Math.PI, noNaN: true }),
          }),
          { maxLength: 40 },
        ),
        (gestures) => {
          let cov = isoCov(0.25);
          for (const g of gestures) {
            cov = applyPinch(cov, g.factor, g.angle);
            expect(isPD(cov)).toBe(true);
            expect(eigMin(cov)).toBeGreaterThanOrEqual(
              MIN_EIGENVALUE * (1 - 1e-9),
            );
          }
        },
      ),
      { numRuns: 300 },
    );
  });

  it("ignores junk factors instead of corrupting state", () => {
    const out = applyPinch(isoCov(0.1), Number.NaN, 0.3);
    expect(out.s11).toBeCloseTo(0.1, 12);
    expect(out.s22).toBeCloseTo(0.1, 12);
  });
});

describe("ellipseOf", () => {
  it("isotropic covariance gives a circle of radius sigma", () => {
    const { rx, ry } = ellipseOf(isoCov(0.04));
    expect(rx).toBeCloseTo(0.2, 12);
    expect(ry).toBeCloseTo(0.2, 12);
  });

  it("axes are the square roots of the eigenvalues", () => {
    const { rx, ry } = ellipseOf({ s11: 2, s12: 1, s22: 2 });
    expect(rx).toBeCloseTo(Math.sqrt(3), 12);
    expect(ry).toBeCloseTo(1, 12);
  });
});
