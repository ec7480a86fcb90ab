import init, { potential_curve, flashing_density, parrondo_curve } from "./pkg/ratchetlab_web.js";

// Interleaved x, y pairs to arrays of points.
function pairs(flat) {
  const pts = [];
  for (let i = 0; i + 1 < flat.length; i += 2) pts.push([flat[i], flat[i + 1]]);
  return pts;
}

function plot(canvas, pts, { zeroLine = false } = {}) {
  const ctx = canvas.getContext("2d");
  const { width, height } = canvas;
  const pad = 36;
  ctx.clearRect(0, 0, width, height);
  if (pts.length === 0) return;
  let [x0, x1, y0, y1] = [Infinity, -Infinity, Infinity, -Infinity];
  for (const [x, y] of pts) {
    x0 = Math.min(x0, x); x1 = Math.max(x1, x);
    y0 = Math.min(y0, y); y1 = Math.max(y1, y);
  }
  if (zeroLine) { y0 = Math.min(y0, 0); y1 = Math.max(y1, 0); }
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const sx = (x) => pad + (x - x0) / (x1 - x0) * (width - 2 * pad);
  const sy = (y) => height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad, width - 2 * pad, height - 2 * pad);
  if (zeroLine) {
    ctx.beginPath();
    ctx.moveTo(pad, sy(0));
    ctx.lineTo(width - pad, sy(0));
    ctx.stroke();
  }
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  ctx.fillText(x0.toPrecision(3), pad, height - pad + 14);
  ctx.fillText(x1.toPrecision(3), width - pad - 24, height - pad + 14);
  ctx.fillText(y1.toPrecision(3), 2, pad + 4);
  ctx.fillText(y0.toPrecision(3), 2, height - pad);

  ctx.strokeStyle = "#1f77b4";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(sx(x), sy(y)) : ctx.lineTo(sx(x), sy(y))));
  ctx.stroke();
}

function wire(id, render) {
  const section = document.getElementById(id);
  const inputs = Object.fromEntries([...section.querySelectorAll("input")].map((el) => [el.name, el]));
  const error = section.querySelector(".error");
  const run = () => {
    try {
      render(section, inputs);
      error.textContent = "";
    } catch (e) {
      error.textContent = e.message ?? String(e);
    }
  };
  for (const el of Object.values(inputs)) el.addEventListener("change", run);
  run();
}

const int = (el) => parseInt(el.value, 10);
const num = (el) => parseFloat(el.value);

await init();

wire("potential", (section, v) => {
  const curve = potential_curve(int(v.l), int(v.L), num(v.lambda), 801);
  plot(section.querySelector("canvas"), pairs(curve));
});

wire("flashing", (section, v) => {
  const out = flashing_density(int(v.l), int(v.L), num(v.lambda), v.tau1.value, v.tau2.value, int(v.n), int(v.cycles));
  const stats = out.slice(out.length - 7);
  plot(section.querySelector("canvas"), pairs(out.slice(0, out.length - 7)));
  const f = (x) => x.toPrecision(6);
  section.querySelector(".stats").textContent =
    `areas ${[0, 1, 2].map((i) => f(stats[i])).join(", ")}; ` +
    `heights ${[3, 4, 5].map((i) => f(stats[i])).join(", ")}; mean ${f(stats[6])}`;
});

wire("parrondo", (section, v) => {
  const pts = pairs(parrondo_curve(v.rho.value, int(v.l), int(v.L), 99));
  plot(section.querySelector("canvas"), pts, { zeroLine: true });
  const best = pts.reduce((a, b) => (b[1] > a[1] ? b : a));
  section.querySelector(".stats").textContent =
    `profit of the mixture against c; largest ${best[1].toPrecision(4)} at c = ${best[0].toFixed(2)}`;
});
