import init, { Demo, papr_projection } from "./pkg/isac_demo.js";

const $ = (id) => document.getElementById(id);
let demo = null;

function plot(canvas, series, opts = {}) {
  const dpr = window.devicePixelRatio || 1;
  const w = canvas.clientWidth, h = canvas.clientHeight;
  canvas.width = w * dpr;
  canvas.height = h * dpr;
  const ctx = canvas.getContext("2d");
  ctx.scale(dpr, dpr);
  ctx.clearRect(0, 0, w, h);
  const pad = 36;
  const xs = series.flatMap((s) => s.x), ys = series.flatMap((s) => s.y);
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  let y0 = opts.ymin ?? Math.min(...ys), y1 = Math.max(...ys);
  if (y1 === y0) y1 = y0 + 1;
  const px = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - pad - 8);
  const py = (y) => h - pad + 10 - ((Math.max(y, y0) - y0) / (y1 - y0)) * (h - pad - 8);

  ctx.strokeStyle = "#ccc";
  ctx.fillStyle = "#666";
  ctx.font = "11px system-ui";
  ctx.strokeRect(pad, 2, w - pad - 8, h - pad + 8);
  ctx.fillText(x0.toPrecision(3), pad, h - 12);
  ctx.fillText(x1.toPrecision(3), w - 40, h - 12);
  ctx.fillText(y1.toPrecision(3), 2, 12);
  ctx.fillText(y0.toPrecision(3), 2, h - pad + 8);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = s.width ?? 1.5;
    ctx.beginPath();
    s.x.forEach((x, i) => (i ? ctx.lineTo(px(x), py(s.y[i])) : ctx.moveTo(px(x), py(s.y[i]))));
    ctx.stroke();
  }
}

const idx = (n) => Array.from({ length: n }, (_, i) => i);

function showDesign(v) {
  const rows = [
    ["iterations", `${v.iterations}${v.converged ? "" : " (not converged)"}`],
    ["η", v.eta.toFixed(3)],
    ["MUI ‖Hx − s_D‖²", v.mui.toFixed(4)],
    ["sum rate @ 10 dB", `${v.sum_rate.toFixed(3)} bit/s/Hz`],
    ["ISLR", `${v.islr_db.toFixed(2)} dB`],
    ["measured PAPR", `${v.papr_measured_db.toFixed(3)} dB`],
  ];
  $("metrics").innerHTML = rows.map(([k, x]) => `<tr><td>${k}</td><td>${x}</td></tr>`).join("");

  const d = v.pattern_deg;
  plot($("pattern"), [
    { x: d, y: v.pattern_ideal, color: "#d62728", width: 1 },
    { x: d, y: v.pattern_s0, color: "#999" },
    { x: d, y: v.pattern, color: "#1f77b4" },
  ], { ymin: 0 });
  plot($("ambiguity"), v.ambiguity.map((c, i) => ({ ...c, color: i ? "#ff7f0e" : "#1f77b4" })), { ymin: -60 });
  const n = v.antenna0.length;
  plot($("antenna"), [
    { x: idx(n), y: v.antenna0, color: "#1f77b4" },
    { x: [0, n - 1], y: [v.cap, v.cap], color: "#d62728", width: 1 },
  ], { ymin: 0 });
  plot($("objective"), [{ x: idx(v.objective.length).map((i) => i + 1), y: v.objective, color: "#1f77b4" }]);
}

function busy(msg) {
  $("status").textContent = msg;
  $("design").disabled = $("setup").disabled = true;
  return new Promise((r) => setTimeout(r, 20));
}

function done(msg) {
  $("status").textContent = msg;
  $("design").disabled = demo === null;
  $("setup").disabled = false;
}

async function setup() {
  await busy("designing radar reference…");
  try {
    const t = performance.now();
    demo?.free();
    demo = new Demo(+$("angle").value, $("oversample").checked, +$("seed").value);
    done(`reference ready (${((performance.now() - t) / 1000).toFixed(1)} s)`);
    await design();
  } catch (e) {
    demo = null;
    done(`error: ${e}`);
  }
}

async function design() {
  if (!demo) return;
  await busy("running ADMM…");
  try {
    const t = performance.now();
    showDesign(JSON.parse(demo.design(+$("rho").value, +$("papr").value)));
    done(`done in ${((performance.now() - t) / 1000).toFixed(2)} s`);
  } catch (e) {
    done(`error: ${e}`);
  }
}

function project() {
  try {
    const v = JSON.parse(papr_projection(+$("pcap").value, +$("pseed").value));
    $("pinfo").textContent =
      `PAPR ${v.papr_before_db.toFixed(2)} → ${v.papr_after_db.toFixed(2)} dB, distortion ${(100 * v.distortion).toFixed(1)}%`;
    const n = v.before.length;
    plot($("projection"), [
      { x: idx(n), y: v.before, color: "#999" },
      { x: idx(n), y: v.after, color: "#1f77b4" },
      { x: [0, n - 1], y: [v.cap, v.cap], color: "#d62728", width: 1 },
    ], { ymin: 0 });
  } catch (e) {
    $("pinfo").textContent = `error: ${e}`;
  }
}

$("rho").oninput = () => ($("rho-out").value = (+$("rho").value).toFixed(2));
$("papr").oninput = () => ($("papr-out").value = (+$("papr").value).toFixed(2));
$("setup").onclick = setup;
$("design").onclick = design;
$("project").onclick = project;

await init();
$("project").disabled = false;
project();
await setup();
