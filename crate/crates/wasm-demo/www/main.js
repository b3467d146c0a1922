import init, { sigmoid_curves, fit_coefficients, nag_traces, packed_sums } from "./pkg/qgrad_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function guarded(f) {
  return () => {
    $("error").textContent = "";
    try {
      f();
    } catch (e) {
      $("error").textContent = String(e.message ?? e);
    }
  };
}

// series: [{ xs, ys, color }]
function plot(canvas, series) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.xs);
  const ys = series.flatMap((s) => s.ys).filter(Number.isFinite);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  let [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  if (y0 === y1) { y0 -= 1; y1 += 1; }
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0)) * (h - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.fillStyle = "#555";
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillText(y1.toPrecision(4), 2, pad + 4);
  ctx.fillText(y0.toPrecision(4), 2, h - pad);
  ctx.fillText(String(x0), pad, h - pad + 14);
  ctx.fillText(String(x1), w - pad - 20, h - pad + 14);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.xs.forEach((x, i) => {
      const y = Math.max(y0, Math.min(y1, s.ys[i]));
      i === 0 ? ctx.moveTo(sx(x), sy(y)) : ctx.lineTo(sx(x), sy(y));
    });
    ctx.stroke();
  }
}

function drawCurves() {
  const [deg, lo, hi] = [num("deg"), num("lo"), num("hi")];
  const rows = sigmoid_curves(lo, hi, 400, deg);
  const cols = [[], [], [], []];
  rows.forEach((v, i) => cols[i % 4].push(v));
  plot($("curve"), [
    { xs: cols[0], ys: cols[1], color: "#222" },
    { xs: cols[0], ys: cols[2], color: "#c60" },
    { xs: cols[0], ys: cols[3], color: "#06c" },
  ]);
  const c = fit_coefficients(deg, lo, hi);
  const names = ["c0", ...Array.from({ length: c.length - 1 }, (_, k) => `c${2 * k + 1}`)];
  $("coeffs").textContent = names.map((n, i) => `${n} = ${c[i].toExponential(6)}`).join("\n");
}

function drawTraces() {
  const iters = num("iters");
  const v = nag_traces(num("n"), num("d"), num("noise"), BigInt(num("seed")), iters);
  const xs = Array.from({ length: iters }, (_, i) => i + 1);
  plot($("trace"), [
    { xs, ys: Array.from(v.slice(0, iters)), color: "#c60" },
    { xs, ys: Array.from(v.slice(iters)), color: "#06c" },
  ]);
}

function showPacked() {
  $("packed").textContent = packed_sums(num("rows"), num("cols"), BigInt(num("pseed")));
}

await init();
$("fit").onclick = guarded(drawCurves);
$("train").onclick = guarded(drawTraces);
$("pack").onclick = guarded(showPacked);
guarded(drawCurves)();
guarded(drawTraces)();
guarded(showPacked)();
