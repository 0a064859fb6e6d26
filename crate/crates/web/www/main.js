// Build the module first: wasm-pack build crates/web --target web --out-dir www/pkg
import init, { grow_region, synthetic_trajectory, prototype_path, Recognizer } from "./pkg/trajsign_web.js";

const W = 160, H = 120, SCALE = 3;
const $ = (id) => document.getElementById(id);

// ---- region growing ----
let pixels = new Uint8Array(W * H);

function randomImage() {
  pixels.fill(30);
  for (let k = 0; k < 9; k++) {
    const cx = Math.random() * W, cy = Math.random() * H;
    const rx = 6 + Math.random() * 22, ry = 4 + Math.random() * 14;
    const angle = Math.random() * Math.PI, value = 90 + Math.floor(Math.random() * 165);
    const c = Math.cos(angle), s = Math.sin(angle);
    for (let y = 0; y < H; y++) {
      for (let x = 0; x < W; x++) {
        const dx = x - cx, dy = y - cy;
        const u = (c * dx + s * dy) / rx, v = (-s * dx + c * dy) / ry;
        if (u * u + v * v <= 1) pixels[y * W + x] = value;
      }
    }
  }
  drawRegion(null);
}

function drawRegion(result) {
  const ctx = $("region").getContext("2d");
  const img = ctx.createImageData(W, H);
  for (let i = 0; i < W * H; i++) {
    const g = pixels[i], hit = result && result.mask[i];
    img.data.set(hit ? [255, 120 + g / 3, 40, 255] : [g, g, g, 255], i * 4);
  }
  const tmp = new OffscreenCanvas(W, H);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, W * SCALE, H * SCALE);
  if (!result) return;
  const { x, y, area, orientation } = result.stats;
  const len = Math.sqrt(area) * SCALE;
  ctx.strokeStyle = "#0044ff";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo((x + 0.5) * SCALE - len * Math.cos(orientation), (y + 0.5) * SCALE - len * Math.sin(orientation));
  ctx.lineTo((x + 0.5) * SCALE + len * Math.cos(orientation), (y + 0.5) * SCALE + len * Math.sin(orientation));
  ctx.stroke();
}

function onRegionClick(ev) {
  const r = $("region").getBoundingClientRect();
  const x = Math.floor((ev.clientX - r.left) / SCALE), y = Math.floor((ev.clientY - r.top) / SCALE);
  try {
    const result = JSON.parse(grow_region(W, H, pixels, x, y, Number($("tolerance").value)));
    drawRegion(result);
    const s = result.stats;
    $("region-out").textContent =
      `seed (${x}, ${y})\narea ${s.area} px\ncentroid (${s.x.toFixed(2)}, ${s.y.toFixed(2)})\n` +
      `orientation ${s.orientation.toFixed(3)} rad\neccentricity ${s.eccentricity.toFixed(3)}`;
  } catch (e) {
    $("region-out").textContent = String(e);
  }
}

// ---- trajectory ----
function plot(ctx, pts, size, style) {
  ctx.strokeStyle = style;
  ctx.beginPath();
  pts.forEach(([x, y], i) => (i ? ctx.lineTo(x * size, y * size) : ctx.moveTo(x * size, y * size)));
  ctx.stroke();
}

function showTrajectory() {
  const canvas = $("trajectory"), ctx = canvas.getContext("2d"), size = canvas.width;
  ctx.clearRect(0, 0, size, size);
  try {
    const code = Number($("sign").value);
    const t = JSON.parse(synthetic_trajectory(code, Number($("subject").value), Number($("rep").value)));
    ctx.setLineDash([5, 5]);
    plot(ctx, JSON.parse(prototype_path(code, 200)), size, "#999");
    ctx.setLineDash([]);
    plot(ctx, t.raw, size, "#555");
    ctx.fillStyle = "#d00";
    for (const [x, y] of t.resampled) {
      ctx.beginPath();
      ctx.arc(x * size, y * size, 3, 0, 2 * Math.PI);
      ctx.fill();
    }
    $("trajectory-out").textContent = `${t.raw.length} frames -> ${t.resampled.length} points`;
  } catch (e) {
    $("trajectory-out").textContent = String(e);
  }
}

// ---- recognizer ----
let recognizer = null, stroke = [], drawing = false;

function redrawStroke() {
  const canvas = $("draw"), ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.lineWidth = 3;
  plot(ctx, stroke, canvas.width, "#222");
  ctx.lineWidth = 1;
}

function pointer(ev) {
  const r = $("draw").getBoundingClientRect();
  return [(ev.clientX - r.left) / r.width, (ev.clientY - r.top) / r.height];
}

function finishStroke() {
  if (!drawing) return;
  drawing = false;
  if (!recognizer) {
    $("draw-out").textContent = "train the models first";
    return;
  }
  try {
    const ranked = JSON.parse(recognizer.classify(new Float64Array(stroke.flat())));
    $("draw-out").textContent = ranked
      .slice(0, 5)
      .map((r, i) => `${i + 1}. sign ${r.sign_code}  log-likelihood ${r.loglik.toFixed(1)}`)
      .join("\n");
  } catch (e) {
    $("draw-out").textContent = String(e);
  }
}

function thumbnails() {
  for (let code = 1; code <= 20; code++) {
    const c = document.createElement("canvas");
    c.width = c.height = 70;
    c.title = `sign ${code}`;
    const ctx = c.getContext("2d");
    plot(ctx, JSON.parse(prototype_path(code, 100)), 70, "#333");
    ctx.fillText(String(code), 3, 10);
    $("thumbs").appendChild(c);
  }
}

async function main() {
  await init();
  $("status").textContent = "Ready.";
  randomImage();
  $("region").addEventListener("click", onRegionClick);
  $("new-image").addEventListener("click", randomImage);
  $("tolerance").addEventListener("input", () => ($("tol-value").textContent = $("tolerance").value));
  for (const id of ["sign", "subject", "rep"]) $(id).addEventListener("change", showTrajectory);
  showTrajectory();
  thumbnails();
  $("train").addEventListener("click", () => {
    $("draw-out").textContent = "training...";
    setTimeout(() => {
      const start = performance.now();
      recognizer = new Recognizer(20, 3, 6, BigInt(1));
      $("draw-out").textContent = `trained ${recognizer.classes} models in ${Math.round(performance.now() - start)} ms; draw a sign`;
    }, 10);
  });
  $("clear").addEventListener("click", () => { stroke = []; redrawStroke(); });
  $("draw").addEventListener("pointerdown", (ev) => { drawing = true; stroke = [pointer(ev)]; redrawStroke(); });
  $("draw").addEventListener("pointermove", (ev) => { if (drawing) { stroke.push(pointer(ev)); redrawStroke(); } });
  $("draw").addEventListener("pointerup", finishStroke);
  $("draw").addEventListener("pointerleave", finishStroke);
}

main();
