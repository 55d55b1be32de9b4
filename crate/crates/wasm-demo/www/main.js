// Plain-module glue: wire the sliders to the wasm exports and draw onto
// canvases. Build the wasm package first (see the repo README):
//   wasm-pack build crates/wasm-demo --target web --out-dir www/pkg
import init, {
  evolve_radial,
  scattering_contrast,
  kernel_curve,
  self_check,
} from "./pkg/bslab_wasm.js";

const $ = (id) => document.getElementById(id);

function bindOutput(id) {
  const input = $(id);
  const out = $(id + "-out");
  const sync = () => (out.textContent = Number(input.value).toFixed(2).replace(/\.?0+$/, (m) => (m === ".00" ? ".0" : m === "0" ? "" : m)));
  input.addEventListener("input", sync);
  sync();
  return input;
}

function clear(ctx) {
  ctx.fillStyle = "#11141a";
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
}

function frame(ctx, pad) {
  const { width: w, height: h } = ctx.canvas;
  ctx.strokeStyle = "#2a3039";
  ctx.strokeRect(pad.l, pad.t, w - pad.l - pad.r, h - pad.t - pad.b);
}

function mapper(ctx, pad, x0, x1, y0, y1) {
  const { width: w, height: h } = ctx.canvas;
  return {
    x: (v) => pad.l + ((v - x0) / (x1 - x0)) * (w - pad.l - pad.r),
    y: (v) => h - pad.b - ((v - y0) / (y1 - y0)) * (h - pad.t - pad.b),
  };
}

function polyline(ctx, xs, ys, map, color, width = 1.5) {
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  for (let i = 0; i < xs.length; i++) {
    const px = map.x(xs[i]);
    const py = map.y(ys[i]);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  }
  ctx.stroke();
}

function axisLabel(ctx, text, x, y) {
  ctx.fillStyle = "#76808d";
  ctx.font = "11px system-ui";
  ctx.fillText(text, x, y);
}

const PAD = { l: 46, r: 14, t: 10, b: 22 };

// ---- radial evolution -------------------------------------------------------

function drawEvolution(data) {
  const ctx = $("ev-canvas").getContext("2d");
  clear(ctx);
  const rMax = Math.min(data.radii[data.radii.length - 1], data.times[data.times.length - 1] + 6);
  const peak = Math.max(...data.frames.map((f) => Math.max(...f.profile))) * 1.05 || 1;
  const map = mapper(ctx, PAD, 0, rMax, 0, peak);
  const n = data.frames.length;
  data.frames.forEach((f, i) => {
    const a = 0.12 + (0.88 * i) / Math.max(1, n - 1);
    polyline(ctx, data.radii, f.profile, map, `rgba(120, 180, 255, ${a.toFixed(3)})`, i === n - 1 ? 2 : 1);
  });
  frame(ctx, PAD);
  axisLabel(ctx, "r", ctx.canvas.width - 24, ctx.canvas.height - 8);
  axisLabel(ctx, "|u|", 8, 18);

  const dctx = $("ev-drift").getContext("2d");
  clear(dctx);
  const logs = (arr) => arr.map((v) => Math.log10(Math.max(v, 1e-18)));
  const lm = logs(data.mass_drift);
  const le = logs(data.energy_drift);
  const lo = Math.min(...lm, ...le, -16);
  const hi = Math.max(...lm, ...le, -4) + 0.5;
  const dmap = mapper(dctx, PAD, data.times[0], data.times[data.times.length - 1], lo, hi);
  polyline(dctx, data.times, lm, dmap, "#58a6ff");
  polyline(dctx, data.times, le, dmap, "#f0883e");
  frame(dctx, PAD);
  axisLabel(dctx, "t", dctx.canvas.width - 24, dctx.canvas.height - 8);
  axisLabel(dctx, "log10 drift", 8, 18);
  $("ev-legend").innerHTML =
    '<span><i class="swatch" style="background:#58a6ff"></i>mass</span>' +
    '<span><i class="swatch" style="background:#f0883e"></i>energy</span>';
}

async function runEvolution() {
  const btn = $("ev-run");
  btn.disabled = true;
  try {
    const data = JSON.parse(
      evolve_radial(
        Number($("ev-mass").value),
        Number($("ev-mu0").value),
        Number($("ev-coupling").value),
        Number($("ev-amp").value),
        1.0,
        Number($("ev-t").value),
      ),
    );
    drawEvolution(data);
  } catch (e) {
    setStatus("evolution failed: " + e);
  } finally {
    btn.disabled = false;
  }
}

// ---- scattering contrast ----------------------------------------------------

function drawScattering(data) {
  const ctx = $("sc-canvas").getContext("2d");
  clear(ctx);
  const xs = data.bases.map(Math.log2);
  const logs = (arr) => arr.map((v) => Math.log10(Math.max(v, 1e-12)));
  const ly = logs(data.yukawa_gaps);
  const lc = logs(data.coulomb_gaps);
  const lo = Math.min(...ly, ...lc) - 0.3;
  const hi = Math.max(...ly, ...lc) + 0.3;
  const map = mapper(ctx, PAD, xs[0] - 0.2, xs[xs.length - 1] + 0.2, lo, hi);
  polyline(ctx, xs, ly, map, "#58a6ff", 2);
  polyline(ctx, xs, lc, map, "#f0883e", 2);
  const lr = data.ratios.map((v) => Math.log10(Math.max(v, 1e-3)));
  const rmap = mapper(ctx, PAD, xs[0] - 0.2, xs[xs.length - 1] + 0.2, Math.min(...lr) - 0.3, Math.max(...lr) + 0.3);
  ctx.setLineDash([5, 4]);
  polyline(ctx, xs, lr, rmap, "#9aa5b1", 1.5);
  ctx.setLineDash([]);
  for (let i = 0; i < xs.length; i++) {
    ctx.fillStyle = "#58a6ff";
    ctx.beginPath(); ctx.arc(map.x(xs[i]), map.y(ly[i]), 3, 0, 7); ctx.fill();
    ctx.fillStyle = "#f0883e";
    ctx.beginPath(); ctx.arc(map.x(xs[i]), map.y(lc[i]), 3, 0, 7); ctx.fill();
  }
  frame(ctx, PAD);
  axisLabel(ctx, "log2 T_k", ctx.canvas.width - 70, ctx.canvas.height - 8);
  axisLabel(ctx, "log10 G_k   (blue: yukawa, orange: coulomb, dashed: ratio)", 8, 18);
}

async function runScattering() {
  const btn = $("sc-run");
  btn.disabled = true;
  setStatus("running scattering contrast (two long evolutions)…");
  await new Promise((r) => setTimeout(r, 30)); // let the UI paint
  try {
    const data = JSON.parse(
      scattering_contrast(
        Number($("sc-mass").value),
        Number($("sc-mu0").value),
        Number($("sc-amp").value),
        Number($("sc-t").value),
      ),
    );
    drawScattering(data);
    setStatus("ready");
  } catch (e) {
    setStatus("scattering run failed: " + e);
  } finally {
    btn.disabled = false;
  }
}

// ---- kernel curve -----------------------------------------------------------

function drawKernel(data) {
  const ctx = $("kr-canvas").getContext("2d");
  clear(ctx);
  const peak = Math.max(...data.values) * 1.08 || 1;
  const t0 = data.taus[0];
  const t1 = data.taus[data.taus.length - 1];
  const map = mapper(ctx, PAD, t0, t1, 0, peak);
  // degenerate fringes
  ctx.fillStyle = "rgba(240, 136, 62, 0.10)";
  const dx = map.x(-data.degenerate_from);
  ctx.fillRect(map.x(t0), PAD.t, dx - map.x(t0), ctx.canvas.height - PAD.t - PAD.b);
  const dx2 = map.x(data.degenerate_from);
  ctx.fillRect(dx2, PAD.t, map.x(t1) - dx2, ctx.canvas.height - PAD.t - PAD.b);
  polyline(ctx, data.taus, data.values, map, "#7ee2a8", 2);
  frame(ctx, PAD);
  axisLabel(ctx, "tau", ctx.canvas.width - 30, ctx.canvas.height - 8);
  axisLabel(ctx, "I(phi, psi)(tau, xi)", 8, 18);
}

function runKernel() {
  try {
    const data = JSON.parse(
      kernel_curve(
        Number($("kr-xi").value),
        Number($("kr-m").value),
        Number($("kr-pc").value),
        Number($("kr-pw").value),
        Number($("kr-qc").value),
        Number($("kr-qw").value),
      ),
    );
    drawKernel(data);
  } catch (e) {
    setStatus("kernel curve failed: " + e);
  }
}

// ---- boot -------------------------------------------------------------------

function setStatus(text) {
  $("status").textContent = text;
}

async function main() {
  await init();
  const check = JSON.parse(self_check());
  setStatus(
    `ready — self check: unitarity drift ${check.unitarity_drift.toExponential(1)}, ` +
      `gauge defect ${check.gauge_defect.toExponential(1)}`,
  );
  ["ev-mass", "ev-mu0", "ev-coupling", "ev-amp", "ev-t"].forEach(bindOutput);
  ["sc-mass", "sc-mu0", "sc-amp", "sc-t"].forEach(bindOutput);
  ["kr-xi", "kr-m", "kr-pc", "kr-pw", "kr-qc", "kr-qw"].forEach(bindOutput);
  $("ev-run").addEventListener("click", runEvolution);
  $("sc-run").addEventListener("click", runScattering);
  ["kr-xi", "kr-m", "kr-pc", "kr-pw", "kr-qc", "kr-qw"].forEach((id) =>
    $(id).addEventListener("change", runKernel),
  );
  runEvolution();
  runKernel();
}

main().catch((e) => setStatus("failed to start: " + e));
