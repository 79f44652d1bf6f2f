import { describe, expect, it, vi } from "vitest";
import type { RetrievedClip } from "../src/api";
import { isoCov } from "../src/covariance";
import {
  drawScene,
  renderError,
  renderResults,
  toCanvas,
  type DrawCtx,
  type VaView,
} from "../src/render";

const VIEW: VaView = { width: 400, height: 400 };

/** Records every draw call so scenes can be snapshot-tested. */
function recordingCtx(): { ctx: DrawCtx; ops: string[] } {
  const ops: string[] = [];
  const fmt = (xs: number[]) => xs.map((x) => +x.toFixed(3)).join(",");
  const ctx: DrawCtx = {
    clearRect: (...a) => void ops.push(`clearRect(${fmt(a)})`),
    beginPath: () => void ops.push("beginPath"),
    moveTo: (...a) => void ops.push(`moveTo(${fmt(a)})`),
    lineTo: (...a) => void ops.push(`lineTo(${fmt(a)})`),
    ellipse: (...a) => void ops.push(`ellipse(${fmt(a)})`),
    arc: (...a) => void ops.push(`arc(${fmt(a)})`),
    stroke: () => void ops.push(`stroke[${ctx.strokeStyle},w=${ctx.lineWidth}]`),
    fill: () => void ops.push(`fill[${ctx.fillStyle}]`),
    strokeStyle: "",
    fillStyle: "",
    lineWidth: 1,
  };
  return { ctx, ops };
}

const FIXTURE: RetrievedClip[] = [
  { clip_id: "clip_0007", score: -1.2345678, mean: [0.5, 0.5], cov: [0.01, 0, 0.01] },
  { clip_id: "clip_0002", score: -2.5, mean: [-0.5, 0.25], cov: [0.04, 0.01, 0.02] },
];

describe("toCanvas", () => {
  it("maps the VA square onto the canvas with arousal up", () => {
    expect(toCanvas(VIEW, -1, -1)).toEqual([0, 400]);
    expect(toCanvas(VIEW, 1, 1)).toEqual([400, 0]);
    expect(toCanvas(VIEW, 0, 0)).toEqual([200, 200]);
  });
});

describe("drawScene", () => {
  it("renders the stubbed retrieval round trip to the golden op stream", () => {
    const { ctx, ops } = recordingCtx();
    drawScene(ctx, VIEW, {
      query: { mean: [0.2, -0.1], cov: isoCov(0.04) },
      results: FIXTURE,
    });
    expect(ops).toMatchSnapshot();
  });

  it("a top hit at the query Gaussian draws a coincident ellipse", () => {
    const { ctx, ops } = recordingCtx();
    drawScene(ctx, VIEW, {
      query: { mean: [0.5, 0.5], cov: isoCov(0.01) },
      results: [FIXTURE[0]],
    });
    const ellipses = ops.filter((o) => o.startsWith("ellipse"));
    expect(ellipses).toHaveLength(2);
    expect(ellipses[0]).toBe(ellipses[1]);
  });

  it("with no query it draws only the axes", () => {
    const { ctx, ops } = recordingCtx();
    drawScene(ctx, VIEW, { query: null, results: [] });
    expect(ops.filter((o) => o.startsWith("ellipse"))).toHaveLength(0);
    expect(ops.filter((o) => o.startsWith("moveTo"))).toHaveLength(2);
  });
});

describe("renderResults", () => {
  it("renders the ranked rows and forwards clicks", () => {
    const panel = document.createElement("div");
    const onPick = vi.fn();
    renderResults(panel, FIXTURE, onPick);
    expect(panel.innerHTML).toMatchSnapshot();

    const rows = panel.querySelectorAll("button");
    expect(rows).toHaveLength(2);
    (rows[1] as HTMLButtonElement).click();
    expect(onPick).toHaveBeenCalledWith(FIXTURE[1]);
  });

  it("empty results show the empty state", () => {
    const panel = document.createElement("div");
    renderResults(panel, [], vi.fn());
    expect(panel.querySelector(".empty")?.textContent).toBe("No results.");
    expect(panel.querySelectorAll("li")).toHaveLength(0);
  });

  it("re-rendering replaces previous rows", () => {
    const panel = document.createElement("div");
    renderResults(panel, FIXTURE, vi.fn());
    renderResults(panel, FIXTURE.slice(0, 1), vi.fn());
    expect(panel.querySelectorAll("li")).toHaveLength(1);
  });
});

describe("renderError", () => {
  it("shows the code verbatim and retries on click", () => {
    const panel = document.createElement("div");
    const onRetry = vi.fn();
    renderError(panel, "EmptyInput", "bundle has no library index", onRetry);
    expect(panel.textContent).toContain("[EmptyInput] bundle has no library index");
    (panel.querySelector("button") as HTMLButtonElement).click();
    expect(onRetry).toHaveBeenCalledOnce();
  });
});
