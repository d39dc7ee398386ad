// Expects the wasm-bindgen web target output in ./pkg (see README).
import init, { FarmDemo, contribution } from "./pkg/windfarm_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const canvas = $("farm");
const ctx = canvas.getContext("2d");
const FIELD_RES = 24;
let demo = null;

function rebuild() {
  demo?.free();
  demo = new FarmDemo(
    Number($("turbines").value),
    $("random").checked,
    Number($("k").value),
    BigInt($("seed").value),
    Number($("amp").value),
    Number($("scale").value),
  );
  applyPin();
}

function applyPin() {
  if ($("pin").checked) demo.set_wind_direction(Number($("dir").value));
  else demo.release_wind();
}

// unit square (y up) to canvas pixels
const px = (x) => 40 + x * (canvas.width - 80);
const py = (y) => canvas.height - 40 - y * (canvas.height - 80);

function arrow(x, y, deg, len, color, width = 1) {
  const r = (deg * Math.PI) / 180;
  const dx = Math.cos(r) * len, dy = -Math.sin(r) * len;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  ctx.moveTo(x - dx / 2, y - dy / 2);
  ctx.lineTo(x + dx / 2, y + dy / 2);
  ctx.stroke();
  const hx = x + dx / 2, hy = y + dy / 2, a = Math.atan2(dy, dx);
  ctx.beginPath();
  ctx.moveTo(hx, hy);
  ctx.lineTo(hx - 5 * Math.cos(a - 0.5), hy - 5 * Math.sin(a - 0.5));
  ctx.lineTo(hx - 5 * Math.cos(a + 0.5), hy - 5 * Math.sin(a + 0.5));
  ctx.closePath();
  ctx.fillStyle = color;
  ctx.fill();
}

function light(c) {
  // contribution equals the normalised angle when positive
  if (c > 0.75) return "#2a9d3a";
  if (c > 0.5) return "#e0b000";
  return "#d03030";
}

function draw() {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const field = demo.field(FIELD_RES);
  for (let row = 0; row < FIELD_RES; row++) {
    for (let col = 0; col < FIELD_RES; col++) {
      const x = col / (FIELD_RES - 1), y = 1 - row / (FIELD_RES - 1);
      arrow(px(x), py(y), field[row * FIELD_RES + col], 14, "#9bb4c8");
    }
  }
  const pos = demo.positions();
  const edges = demo.edges();
  ctx.strokeStyle = "rgba(80, 80, 160, 0.35)";
  ctx.lineWidth = 1;
  for (let i = 0; i < edges.length; i += 2) {
    const a = edges[i], b = edges[i + 1];
    ctx.beginPath();
    ctx.moveTo(px(pos[2 * a]), py(pos[2 * a + 1]));
    ctx.lineTo(px(pos[2 * b]), py(pos[2 * b + 1]));
    ctx.stroke();
  }
  const orient = demo.orientations();
  const contrib = demo.contributions();
  const pooled = demo.pooled();
  for (let i = 0; i < orient.length; i++) {
    const x = px(pos[2 * i]), y = py(pos[2 * i + 1]);
    const wx = pooled[2 * i], wy = pooled[2 * i + 1];
    const mag = Math.hypot(wx, wy);
    if (mag > 0) arrow(x, y, (Math.atan2(wy, wx) * 180) / Math.PI, 50 * mag, "#6a4fb0", 2);
    arrow(x, y, orient[i], 30, "#333", 3);
    ctx.fillStyle = light(contrib[i]);
    ctx.beginPath();
    ctx.arc(x, y, 6, 0, 2 * Math.PI);
    ctx.fill();
  }
  $("step").value = demo.step_index();
  $("main").value = demo.main_wind_angle().toFixed(1) + "°";
  $("eff").value = demo.efficiency().toFixed(3);
  $("cum").value = demo.cumulative_reward().toFixed(1);
}

function frame() {
  demo.step(Number($("speed").value));
  draw();
  requestAnimationFrame(frame);
}

function showReward() {
  $("rc").value = contribution(Number($("rw").value), Number($("ro").value)).toFixed(3);
}

await init();
for (const id of ["k", "amp", "scale", "dir", "speed"]) {
  $(id).addEventListener("input", () => ($(`${id}-out`).value = $(id).value));
}
for (const id of ["k", "amp", "scale", "turbines", "random", "seed"]) {
  $(id).addEventListener("change", rebuild);
}
$("rebuild").addEventListener("click", rebuild);
$("pin").addEventListener("change", applyPin);
$("dir").addEventListener("input", applyPin);
$("rw").addEventListener("input", showReward);
$("ro").addEventListener("input", showReward);
rebuild();
showReward();
requestAnimationFrame(frame);
