/**
 * Aggregate experiment rows into per-group median/IQR series and render
 * them as a standalone SVG document.
 *
 * Rendering is pure string emission: the same CSV bytes always produce the
 * same SVG bytes, and no display or browser is involved.
 */

import { CsvTable, parseCsv, requireColumns } from "./csv";
import { Band, iqrBand } from "./stats";

export interface PlotSpec {
  figureId: string;
  xColumn: string;
  yColumn: string;
  groupBy: string[];
  xLabel: string;
  yLabel: string;
  title: string;
}

/** Figure presets matching the experiment sweep definitions. */
export const FIGURE_SPECS: Record<string, PlotSpec> = {
  "2": {
    figureId: "2",
    xColumn: "M",
    yColumn: "sum_se",
    groupBy: ["algorithm", "N_ap"],
    xLabel: "number of APs",
    yLabel: "sum SE (bits/s/Hz)",
    title: "Sum SE vs number of APs",
  },
  "3": {
    figureId: "3",
    xColumn: "N_u",
    yColumn: "avg_se",
    groupBy: ["algorithm"],
    xLabel: "antennas per user",
    yLabel: "average SE per user (bits/s/Hz)",
    title: "Average SE vs antennas per user",
  },
  "4": {
    figureId: "4",
    xColumn: "L",
    yColumn: "sum_se",
    groupBy: ["algorithm", "surface", "d_spacing"],
    xLabel: "surface elements",
    yLabel: "sum SE (bits/s/Hz)",
    title: "Sum SE vs surface size",
  },
};

export interface SeriesPoint {
  x: number;
  band: Band;
  samples: number;
}

export interface Series {
  label: string;
  points: SeriesPoint[];
}

function groupLabel(row: Record<string, string>, columns: string[]): string {
  return columns.map((c) => `${c}=${row[c]}`).join(" ");
}

/**
 * Collapse rows into one series per group: sorted sweep values on x,
 * median and interquartile band over the seeds at each point.
 */
export function aggregateSeries(table: CsvTable, spec: PlotSpec): Series[] {
  requireColumns(table, [spec.xColumn, spec.yColumn, ...spec.groupBy]);
  const buckets = new Map<string, Map<number, number[]>>();
  for (const row of table.rows) {
    const label = groupLabel(row, spec.groupBy);
    const x = Number(row[spec.xColumn]);
    const y = Number(row[spec.yColumn]);
    if (!Number.isFinite(x) || !Number.isFinite(y)) {
      throw new Error(
        `non-numeric ${spec.xColumn}/${spec.yColumn} value in group ${label}`,
      );
    }
    let series = buckets.get(label);
    if (!series) {
      series = new Map();
      buckets.set(label, series);
    }
    let samples = series.get(x);
    if (!samples) {
      samples = [];
      series.set(x, samples);
    }
    samples.push(y);
  }
  if (buckets.size === 0) {
    throw new Error("no groups found in the CSV");
  }
  const labels = [...buckets.keys()].sort();
  return labels.map((label) => {
    const perX = buckets.get(label)!;
    const xs = [...perX.keys()].sort((a, b) => a - b);
    return {
      label,
      points: xs.map((x) => {
        const samples = perX.get(x)!;
        return { x, band: iqrBand(samples), samples: samples.length };
      }),
    };
  });
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { left: 64, right: 16, top: 36, bottom: 48 };
const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

function fmt(value: number): string {
  return Number(value.toFixed(3)).toString();
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (hi <= lo) {
    return [lo];
  }
  const rawStep = (hi - lo) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => s >= rawStep) ?? candidates[4];
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let t = start; t <= hi + 1e-9; t += step) {
    ticks.push(Number(t.toPrecision(12)));
  }
  return ticks;
}

/** Render aggregated series into a standalone SVG document. */
export function renderSvg(seriesList: Series[], spec: PlotSpec): string {
  const xs = seriesList.flatMap((s) => s.points.map((p) => p.x));
  const ys = seriesList.flatMap((s) =>
    s.points.flatMap((p) => [p.band.q1, p.band.q3]),
  );
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yLo = 0;
  const yHi = Math.max(...ys) * 1.05 || 1;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number): number =>
    xHi === xLo
      ? MARGIN.left + plotW / 2
      : MARGIN.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number): number =>
    MARGIN.top + plotH - ((y - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
      `height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="20" text-anchor="middle" ` +
      `font-family="sans-serif" font-size="14">${spec.title}</text>`,
  );

  // axes
  const axisY = MARGIN.top + plotH;
  parts.push(
    `<line x1="${MARGIN.left}" y1="${axisY}" x2="${MARGIN.left + plotW}" ` +
      `y2="${axisY}" stroke="black"/>`,
  );
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" ` +
      `y2="${axisY}" stroke="black"/>`,
  );
  const xTicks = [...new Set(xs)].sort((a, b) => a - b);
  for (const t of xTicks) {
    const px = sx(t);
    parts.push(
      `<line x1="${fmt(px)}" y1="${axisY}" x2="${fmt(px)}" ` +
        `y2="${axisY + 4}" stroke="black"/>`,
    );
    parts.push(
      `<text x="${fmt(px)}" y="${axisY + 18}" text-anchor="middle" ` +
        `font-family="sans-serif" font-size="11">${t}</text>`,
    );
  }
  for (const t of niceTicks(yLo, yHi, 5)) {
    const py = sy(t);
    parts.push(
      `<line x1="${MARGIN.left - 4}" y1="${fmt(py)}" x2="${MARGIN.left}" ` +
        `y2="${fmt(py)}" stroke="black"/>`,
    );
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(py)}" ` +
        `x2="${MARGIN.left + plotW}" y2="${fmt(py)}" ` +
        `stroke="#dddddd" stroke-width="0.5"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(py + 4)}" text-anchor="end" ` +
        `font-family="sans-serif" font-size="11">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 10}" ` +
      `text-anchor="middle" font-family="sans-serif" font-size="12">` +
      `${spec.xLabel}</text>`,
  );
  parts.push(
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `font-family="sans-serif" font-size="12" ` +
      `transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">` +
      `${spec.yLabel}</text>`,
  );

  // interquartile bands first so the median lines stay on top
  seriesList.forEach((series, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const upper = series.points.map(
      (p) => `${fmt(sx(p.x))},${fmt(sy(p.band.q3))}`,
    );
    const lower = [...series.points]
      .reverse()
      .map((p) => `${fmt(sx(p.x))},${fmt(sy(p.band.q1))}`);
    parts.push(
      `<polygon points="${upper.concat(lower).join(" ")}" fill="${color}" ` +
        `fill-opacity="0.15" stroke="none"/>`,
    );
  });
  seriesList.forEach((series, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const pts = series.points.map(
      (p) => `${fmt(sx(p.x))},${fmt(sy(p.band.median))}`,
    );
    parts.push(
      `<polyline points="${pts.join(" ")}" fill="none" stroke="${color}" ` +
        `stroke-width="1.8"/>`,
    );
    for (const p of series.points) {
      parts.push(
        `<circle cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.band.median))}" ` +
          `r="2.6" fill="${color}"/>`,
      );
    }
  });

  // legend
  seriesList.forEach((series, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const ly = MARGIN.top + 10 + idx * 16;
    const lx = MARGIN.left + 12;
    parts.push(
      `<line x1="${lx}" y1="${ly}" x2="${lx + 18}" y2="${ly}" ` +
        `stroke="${color}" stroke-width="1.8"/>`,
    );
    parts.push(
      `<text x="${lx + 24}" y="${ly + 4}" font-family="sans-serif" ` +
        `font-size="11">${series.label}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

/** Parse, aggregate and render one figure; returns the SVG text. */
export function renderFigure(csvText: string, figureId: string): string {
  const spec = FIGURE_SPECS[figureId];
  if (!spec) {
    throw new Error(`unknown figure preset ${figureId}`);
  }
  const table = parseCsv(csvText);
  const series = aggregateSeries(table, spec);
  return renderSvg(series, spec);
}
