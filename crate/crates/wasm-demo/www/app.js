import init, { posterior_weights, alpha_trajectory, aggregate } from "./pkg/drfs_wasm.js";

const $ = (id) => document.getElementById(id);

function mulberry32(a) {
  return () => {
    a |= 0; a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

// kernel weights
const rand = mulberry32(7);
const gauss = () => Math.sqrt(-2 * Math.log(rand() + 1e-12)) * Math.cos(2 * Math.PI * rand());
const cloud = new Float64Array(80 * 2).map(() => gauss());
let s = [0.3, -0.2];
const span = 3.2;

function toPx(v, size) { return ((v + span) / (2 * span)) * size; }
function fromPx(p, size) { return (p / size) * 2 * span - span; }

function drawKernel() {
  const c = $("kernel"), g = c.getContext("2d");
  const alpha = [10 ** +$("a1").value, 10 ** +$("a2").value];
  const w = posterior_weights(cloud, s, alpha);
  g.clearRect(0, 0, c.width, c.height);
  const wmax = Math.max(...w);
  for (let i = 0; i < w.length; i++) {
    const x = toPx(cloud[2 * i], c.width), y = c.height - toPx(cloud[2 * i + 1], c.height);
    g.fillStyle = "#bbb";
    g.fillRect(x - 1, y - 1, 2, 2);
    const r = 14 * Math.sqrt(w[i] / wmax);
    if (r > 0.3) {
      g.beginPath(); g.arc(x, y, r, 0, 2 * Math.PI);
      g.fillStyle = "rgba(30, 90, 200, 0.45)"; g.fill();
    }
  }
  const sx = toPx(s[0], c.width), sy = c.height - toPx(s[1], c.height);
  g.strokeStyle = "#c22"; g.beginPath();
  g.moveTo(sx - 6, sy); g.lineTo(sx + 6, sy); g.moveTo(sx, sy - 6); g.lineTo(sx, sy + 6); g.stroke();
  const sorted = Array.from(w).sort((a, b) => b - a);
  const ess = 1 / w.reduce((acc, v) => acc + v * v, 0);
  $("kinfo").textContent =
    `alpha = [${alpha.map((a) => a.toPrecision(3)).join(", ")}]\n` +
    `largest weight  ${sorted[0].toFixed(4)}\neffective rows  ${ess.toFixed(1)} of ${w.length}`;
}

$("kernel").addEventListener("click", (e) => {
  const c = e.target, r = c.getBoundingClientRect();
  s = [fromPx(e.clientX - r.left, c.width), fromPx(c.height - (e.clientY - r.top), c.height)];
  drawKernel();
});
$("a1").addEventListener("input", drawKernel);
$("a2").addEventListener("input", drawKernel);

// alpha trajectory
function drawTrajectory(t) {
  const c = $("traj"), g = c.getContext("2d");
  g.clearRect(0, 0, c.width, c.height);
  const pad = 36, W = c.width - 2 * pad, H = c.height - 2 * pad;
  const logs = t.alpha.map((row) => row.map((a) => Math.log10(a)));
  const flat = logs.flat();
  const lo = Math.min(...flat), hi = Math.max(...flat, lo + 1e-9);
  const last = t.epochs[t.epochs.length - 1] || 1;
  const X = (e) => pad + (e / last) * W, Y = (v) => pad + H - ((v - lo) / (hi - lo)) * H;
  g.strokeStyle = "#888"; g.strokeRect(pad, pad, W, H);
  g.fillStyle = "#444";
  g.fillText(`log10 alpha ${hi.toFixed(2)}`, 4, pad - 6);
  g.fillText(lo.toFixed(2), 4, pad + H + 14);
  g.fillText(`epoch ${last}`, pad + W - 50, pad + H + 14);
  const m = t.feature_names.length;
  for (let d = 0; d < m; d++) {
    const signal = t.signal.includes(d);
    g.strokeStyle = signal ? `hsl(${(d * 360) / 11}, 65%, 45%)` : "#bbb";
    g.lineWidth = signal ? 1.6 : 1;
    g.beginPath();
    logs.forEach((row, i) => (i ? g.lineTo : g.moveTo).call(g, X(t.epochs[i]), Y(row[d])));
    g.stroke();
  }
  const final = t.alpha[t.alpha.length - 1];
  $("tinfo").textContent = "rank feature  alpha     signal\n" + t.ranked
    .map((d, i) => `${String(i + 1).padStart(4)} ${t.feature_names[d].padEnd(8)} ${final[d].toExponential(2)}  ${t.signal.includes(d) ? "yes" : ""}`)
    .join("\n");
}

$("go").addEventListener("click", () => {
  $("go").disabled = true;
  $("tinfo").textContent = "optimizing…";
  setTimeout(() => {
    try {
      drawTrajectory(JSON.parse(alpha_trajectory(+$("n").value, +$("ep").value, +$("lam").value, BigInt($("seed").value))));
    } catch (e) {
      $("tinfo").textContent = String(e);
    }
    $("go").disabled = false;
  }, 10);
});

// aggregation
function drawAggregate() {
  try {
    const losses = new Float64Array($("losses").value.split(",").map(Number));
    const beta = $("hard").checked ? 0 : 10 ** +$("beta").value;
    const r = aggregate(losses, beta);
    $("ainfo").textContent =
      `beta = ${beta ? beta.toPrecision(3) : "hard max"}\naggregate = ${r[0].toFixed(5)}\n` +
      `max = ${Math.max(...losses).toFixed(5)}   mean = ${(losses.reduce((a, b) => a + b, 0) / losses.length).toFixed(5)}\n` +
      Array.from(r.slice(1)).map((w, i) => `population ${i}: weight ${w.toFixed(4)}`).join("\n");
  } catch (e) {
    $("ainfo").textContent = String(e);
  }
}
["losses", "beta", "hard"].forEach((id) => $(id).addEventListener("input", drawAggregate));

init().then(() => {
  $("status").textContent = "";
  drawKernel();
  drawAggregate();
});
