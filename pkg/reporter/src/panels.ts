import { LogTable, requireColumn } from "./csv.js";
import { renderChart } from "./svg.js";

export const PANEL_NAMES = ["errors", "param_norms", "constraint_bands",
  "workspace_xy"] as const;
export type PanelName = (typeof PANEL_NAMES)[number];

export interface PanelResult {
  name: PanelName;
  svg: string;
  /** constraint_bands only: samples outside the +-k_m bands */
  outOfBand?: number;
}

function norm(cols: Float64Array[], i: number): number {
  let s = 0;
  for (const c of cols) {
    s += c[i] * c[i];
  }
  return Math.sqrt(s);
}

/** Tracking error norms against the current and the delayed reference. */
export function errorsPanel(table: LogTable): PanelResult {
  const t = requireColumn(table, "t");
  const ep = requireColumn(table, "norm_e_p");
  const epT = requireColumn(table, "norm_e_pt");
  const svg = renderChart({
    title: "Synchronization error norms",
    xLabel: "t [s]",
    yLabel: "error norm [m]",
    series: [
      { label: "|e_p| (current reference)", x: t, y: ep, color: "#1f77b4" },
      { label: "|e_pT| (delayed reference)", x: t, y: epT, color: "#d62728" },
    ],
  });
  return { name: "errors", svg };
}

/** Norms of both parameter estimate vectors. */
export function paramNormsPanel(table: LogTable): PanelResult {
  const t = requireColumn(table, "t");
  const zj = [1, 2].map((i) => requireColumn(table, `zeta_j_hat_${i}`));
  const zy = [1, 2, 3, 4, 5, 6, 7].map((i) => requireColumn(table, `zeta_y_hat_${i}`));
  const zjNorm = new Float64Array(table.rows);
  const zyNorm = new Float64Array(table.rows);
  for (let i = 0; i < table.rows; i++) {
    zjNorm[i] = norm(zj, i);
    zyNorm[i] = norm(zy, i);
  }
  const svg = renderChart({
    title: "Parameter estimate norms",
    xLabel: "t [s]",
    yLabel: "estimate norm",
    series: [
      { label: "|zeta_j_hat| (kinematic)", x: t, y: zjNorm, color: "#2ca02c" },
      { label: "|zeta_y_hat| (dynamic)", x: t, y: zyNorm, color: "#9467bd" },
    ],
  });
  return { name: "param_norms", svg };
}

/**
 * Error components with the +-k_m bands overlaid.  The bound is
 * reconstructed per axis from the logged margin: k_m = margin + |e_p|.
 */
export function constraintBandsPanel(table: LogTable): PanelResult {
  const t = requireColumn(table, "t");
  const e1 = requireColumn(table, "e_p_1");
  const e2 = requireColumn(table, "e_p_2");
  const m1 = requireColumn(table, "constraint_margin_1");
  const m2 = requireColumn(table, "constraint_margin_2");
  if (table.rows === 0) {
    throw new Error("constraint panel needs at least one record");
  }
  const km1 = m1[0] + Math.abs(e1[0]);
  const km2 = m2[0] + Math.abs(e2[0]);
  let outOfBand = 0;
  for (let i = 0; i < table.rows; i++) {
    if (Math.abs(e1[i]) >= km1 || Math.abs(e2[i]) >= km2) {
      outOfBand += 1;
    }
  }
  const svg = renderChart({
    title: "Error components vs constraint bands",
    xLabel: "t [s]",
    yLabel: "e_p [m]",
    series: [
      { label: "e_p_1", x: t, y: e1, color: "#1f77b4" },
      { label: "e_p_2", x: t, y: e2, color: "#d62728" },
    ],
    hlines: [
      { y: km1, color: "#1f77b4", label: `+k_m_1 = ${km1.toPrecision(3)}` },
      { y: -km1, color: "#1f77b4", label: `-k_m_1` },
      { y: km2, color: "#d62728", label: `+k_m_2 = ${km2.toPrecision(3)}` },
      { y: -km2, color: "#d62728", label: `-k_m_2` },
    ],
  });
  return { name: "constraint_bands", svg, outOfBand };
}

/** End-effector and reference paths in the plane. */
export function workspacePanel(table: LogTable): PanelResult {
  const p1 = requireColumn(table, "p_1");
  const p2 = requireColumn(table, "p_2");
  const ph1 = requireColumn(table, "p_h_1");
  const ph2 = requireColumn(table, "p_h_2");
  const svg = renderChart({
    title: "Workspace paths",
    xLabel: "x [m]",
    yLabel: "y [m]",
    equalAspect: true,
    series: [
      { label: "reference p_h", x: ph1, y: ph2, color: "#d62728", dash: "5 3" },
      { label: "end effector p", x: p1, y: p2, color: "#1f77b4" },
    ],
  });
  return { name: "workspace_xy", svg };
}

const BUILDERS: Record<PanelName, (t: LogTable) => PanelResult> = {
  errors: errorsPanel,
  param_norms: paramNormsPanel,
  constraint_bands: constraintBandsPanel,
  workspace_xy: workspacePanel,
};

export function renderPanels(table: LogTable, names: PanelName[]): PanelResult[] {
  return names.map((n) => BUILDERS[n](table));
}

export function parsePanelList(arg: string): PanelName[] {
  const names = arg.split(",").map((s) => s.trim()).filter((s) => s.length > 0);
  for (const n of names) {
    if (!(PANEL_NAMES as readonly string[]).includes(n)) {
      throw new Error(`unknown panel "${n}"; expected one of ${PANEL_NAMES.join(", ")}`);
    }
  }
  return names as PanelName[];
}
