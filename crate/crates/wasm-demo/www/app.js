import init, { densities, laplace_convergence, wasserstein_ladder, laplace_domain } from "./pkg/rankdiff_wasm_demo.js";

const $ = (id) => document.getElementById(id);

function modelArgs() {
  const nodes = $("nodes").value
    .split(";")
    .map((p) => p.trim())
    .filter((p) => p.length > 0)
    .flatMap((p) => p.split(",").map(Number));
  return [new Float64Array(nodes), Number($("sigma2").value)];
}

function guarded(errId, f) {
  return () => {
    $(errId).textContent = "";
    try {
      f();
    } catch (e) {
      $(errId).textContent = e.message ?? String(e);
    }
  };
}

// Minimal canvas plotting: axes, optional log scales, lines and bars.
function plot(canvas, { series, logX = false, logY = false, bars = null }) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, L = 70, R = 20, T = 15, B = 35;
  ctx.clearRect(0, 0, W, H);
  const tx = (v) => (logX ? Math.log10(v) : v);
  const ty = (v) => (logY ? Math.log10(v) : v);
  const pts = series.flatMap((s) => s.points).concat(bars ?? []).filter(([x, y]) => (!logX || x > 0) && (!logY || y > 0));
  if (pts.length === 0) return;
  let [x0, x1] = [Math.min(...pts.map((p) => tx(p[0]))), Math.max(...pts.map((p) => tx(p[0])))];
  let [y0, y1] = [Math.min(...pts.map((p) => ty(p[1]))), Math.max(...pts.map((p) => ty(p[1])))];
  if (!logY) y0 = Math.min(0, y0);
  if (logX) [x0, x1] = [Math.floor(x0), Math.ceil(x1)];
  if (logY) [y0, y1] = [Math.floor(y0), Math.ceil(y1)];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const px = (v) => L + ((tx(v) - x0) / (x1 - x0)) * (W - L - R);
  const py = (v) => T + (1 - (ty(v) - y0) / (y1 - y0)) * (H - T - B);

  ctx.strokeStyle = "#000";
  ctx.strokeRect(L, T, W - L - R, H - T - B);
  ctx.fillStyle = "#000";
  ctx.font = "12px sans-serif";
  const ticks = (lo, hi, log) => {
    if (log) return Array.from({ length: hi - lo + 1 }, (_, i) => lo + i);
    const step = Math.pow(10, Math.floor(Math.log10((hi - lo) / 5)));
    const out = [];
    for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12; v += step) out.push(v);
    return out.length > 12 ? out.filter((_, i) => i % 2 === 0) : out;
  };
  for (const v of ticks(x0, x1, logX)) {
    const x = L + ((v - x0) / (x1 - x0)) * (W - L - R);
    ctx.fillText(logX ? `1e${v}` : +v.toPrecision(3), x - 12, H - B + 16);
  }
  for (const v of ticks(y0, y1, logY)) {
    const y = T + (1 - (v - y0) / (y1 - y0)) * (H - T - B);
    ctx.fillText(logY ? `1e${v}` : +v.toPrecision(3), 8, y + 4);
  }
  if (bars && bars.length > 1) {
    const w = Math.abs(px(bars[1][0]) - px(bars[0][0]));
    ctx.fillStyle = "rgba(214, 39, 40, 0.35)";
    for (const [x, y] of bars) ctx.fillRect(px(x) - w / 2, py(y), w, py(Math.max(y0, 0)) - py(y));
  }
  const colours = ["#1f77b4", "#2ca02c", "#9467bd"];
  series.forEach((s, i) => {
    ctx.strokeStyle = colours[i % colours.length];
    ctx.lineWidth = 2;
    ctx.beginPath();
    s.points.filter(([x, y]) => (!logX || x > 0) && (!logY || y > 0)).forEach(([x, y], j) => (j ? ctx.lineTo(px(x), py(y)) : ctx.moveTo(px(x), py(y))));
    ctx.stroke();
    for (const [x, y] of s.points) if ((!logX || x > 0) && (!logY || y > 0)) ctx.fillRect(px(x) - 2, py(y) - 2, 4, 4);
  });
}

function pairs(flat) {
  const out = [];
  for (let i = 0; i < flat.length; i += 2) out.push([flat[i], flat[i + 1]]);
  return out;
}

function showDomain() {
  $("model-err").textContent = "";
  try {
    const [lo, hi] = laplace_domain(...modelArgs());
    $("domain").textContent = `Laplace domain V = (${lo.toFixed(4)}, ${hi.toFixed(4)})`;
  } catch (e) {
    $("domain").textContent = "";
    $("model-err").textContent = e.message ?? String(e);
  }
}

const runDensities = guarded("d-err", () => {
  const bins = Number($("d-bins").value);
  const flat = densities(...modelArgs(), Number($("d-n").value), Number($("d-draws").value), bins, 1n);
  const x = flat.slice(0, bins), lim = flat.slice(bins, 2 * bins), hist = flat.slice(2 * bins);
  plot($("d-plot"), {
    series: [{ points: Array.from(x, (v, i) => [v, lim[i]]) }],
    bars: Array.from(x, (v, i) => [v, hist[i]]),
  });
});

const runLaplace = guarded("l-err", () => {
  const flat = laplace_convergence(...modelArgs(), Number($("l-s").value), Number($("l-t").value), Number($("l-n").value));
  plot($("l-plot"), { series: [{ points: pairs(flat) }], logX: true, logY: true });
});

const runWasserstein = guarded("w-err", () => {
  const flat = wasserstein_ladder(...modelArgs(), Number($("w-count").value), Number($("w-n").value), 7n);
  plot($("w-plot"), { series: [{ points: pairs(flat) }], logX: true, logY: true });
});

await init();
$("nodes").addEventListener("change", showDomain);
$("sigma2").addEventListener("change", showDomain);
$("d-run").addEventListener("click", runDensities);
$("l-run").addEventListener("click", runLaplace);
$("w-run").addEventListener("click", runWasserstein);
showDomain();
runDensities();
runLaplace();
runWasserstein();
