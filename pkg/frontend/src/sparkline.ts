/** Inline SVG sparkline for the audience-narrowing walk.
 *
 * Audience sizes span orders of magnitude, so the y axis is log-scaled.
 * Pure string output keeps this testable without a DOM.
 */

const WIDTH = 220;
const HEIGHT = 48;
const PAD = 4;

export function sparklinePoints(sizes: readonly number[], width = WIDTH, height = HEIGHT): string {
  if (sizes.length === 0) {
    return "";
  }
  const logs = sizes.map((s) => Math.log10(Math.max(1, s)));
  const maxLog = Math.max(...logs, 1e-9);
  const innerW = width - 2 * PAD;
  const innerH = height - 2 * PAD;
  const step = sizes.length > 1 ? innerW / (sizes.length - 1) : 0;
  return logs
    .map((value, i) => {
      const x = PAD + (sizes.length > 1 ? i * step : innerW / 2);
      const y = PAD + innerH * (1 - value / maxLog);
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}

export function sparklineSvg(sizes: readonly number[], uniqueAt: number | null = null): string {
  const points = sparklinePoints(sizes);
  if (points === "") {
    return `<svg class="sparkline" width="${WIDTH}" height="${HEIGHT}" role="img"></svg>`;
  }
  let marker = "";
  if (uniqueAt !== null && uniqueAt >= 1 && uniqueAt <= sizes.length) {
    const coords = points.split(" ")[uniqueAt - 1];
    if (coords !== undefined) {
      const [x, y] = coords.split(",");
      marker = `<circle class="sparkline-marker" cx="${x}" cy="${y}" r="3"></circle>`;
    }
  }
  return (
    `<svg class="sparkline" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img">` +
    `<polyline fill="none" points="${points}"></polyline>` +
    marker +
    `</svg>`
  );
}
