import init, { pointCloud, selectPoints, boxLosses } from "./pkg/activesel_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

await init();

// point cloud

const cloud = $("cloud");
const cctx = cloud.getContext("2d");
let xy = new Float64Array();

function regenerate() {
  xy = pointCloud(num("clusters"), num("per"), num("outliers"), 0.03, num("cloudSeed"));
  select();
}

function select() {
  const n = xy.length / 2;
  const info = $("cloudInfo");
  info.className = "";
  let sel;
  try {
    sel = selectPoints(xy, $("strategy").value, num("budget"), num("selSeed"));
  } catch (e) {
    info.className = "err";
    info.textContent = e.message;
    drawCloud([], []);
    return;
  }
  const order = sel.order();
  const rejected = sel.rejected();
  drawCloud(order, rejected);
  const lines = [`${n} points, ${order.length} selected`];
  if (rejected.length) lines.push(`${rejected.length} candidates rejected`);
  if (!Number.isNaN(sel.aveD)) lines.push(`mean nearest-neighbor distance ${sel.aveD.toFixed(4)}`);
  if (sel.exhausted) lines.push("ran out of eligible candidates before the budget");
  info.textContent = lines.join("\n");
  sel.free();
}

function toCanvas(x, y) {
  // the outlier ring reaches just past [-0.5, 1.5]
  const s = cloud.width / 2.2;
  return [(x + 0.6) * s, cloud.height - (y + 0.6) * s];
}

function drawCloud(order, rejected) {
  cctx.clearRect(0, 0, cloud.width, cloud.height);
  cctx.fillStyle = "#999";
  for (let i = 0; i < xy.length; i += 2) {
    const [x, y] = toCanvas(xy[i], xy[i + 1]);
    cctx.fillRect(x - 1.5, y - 1.5, 3, 3);
  }
  cctx.strokeStyle = "#c33";
  for (const i of rejected) {
    const [x, y] = toCanvas(xy[2 * i], xy[2 * i + 1]);
    cctx.beginPath();
    cctx.moveTo(x - 4, y - 4); cctx.lineTo(x + 4, y + 4);
    cctx.moveTo(x + 4, y - 4); cctx.lineTo(x - 4, y + 4);
    cctx.stroke();
  }
  cctx.font = "11px sans-serif";
  order.forEach((i, rank) => {
    const [x, y] = toCanvas(xy[2 * i], xy[2 * i + 1]);
    cctx.fillStyle = "#1565c0";
    cctx.beginPath();
    cctx.arc(x, y, 5, 0, 2 * Math.PI);
    cctx.fill();
    cctx.fillStyle = "#000";
    cctx.fillText(String(rank + 1), x + 6, y - 6);
  });
}

for (const id of ["clusters", "per", "outliers", "cloudSeed"]) $(id).addEventListener("input", regenerate);
for (const id of ["strategy", "budget", "selSeed"]) $(id).addEventListener("input", select);

// boxes, in canvas pixels

const boxes = $("boxes");
const bctx = boxes.getContext("2d");
const gt = [180, 110, 340, 250];
let pred = [90, 60, 260, 200];
let drag = null;

function updateLoss() {
  $("alphaOut").textContent = num("alpha").toFixed(2);
  $("betaOut").textContent = num("beta").toFixed(2);
  const info = $("lossInfo");
  info.className = "";
  let v;
  try {
    v = boxLosses(Float64Array.from(pred), Float64Array.from(gt), num("alpha"), num("beta"));
  } catch (e) {
    info.className = "err";
    info.textContent = e.message;
    drawBoxes(null);
    return;
  }
  info.textContent =
    `tversky loss ${v[0].toFixed(4)}\n` +
    `iou loss     ${v[1].toFixed(4)}\n` +
    `dice loss    ${v[2].toFixed(4)}\n` +
    `gradient     [${Array.from(v.slice(3), (g) => g.toExponential(2)).join(", ")}]`;
  drawBoxes(v.slice(3));
}

function rect(b, color) {
  bctx.strokeStyle = color;
  bctx.lineWidth = 2;
  bctx.strokeRect(b[0], b[1], b[2] - b[0], b[3] - b[1]);
}

function arrow(x, y, dx, dy) {
  bctx.beginPath();
  bctx.moveTo(x, y);
  bctx.lineTo(x + dx, y + dy);
  bctx.stroke();
  bctx.beginPath();
  bctx.arc(x + dx, y + dy, 2.5, 0, 2 * Math.PI);
  bctx.fill();
}

function drawBoxes(grad) {
  bctx.clearRect(0, 0, boxes.width, boxes.height);
  rect(gt, "#2e7d32");
  rect(pred, "#1565c0");
  bctx.fillStyle = "#1565c0";
  bctx.fillRect(pred[2] - 4, pred[3] - 4, 8, 8);
  if (!grad) return;
  // longest arrow is 40px
  const scale = 40 / Math.max(1e-12, ...Array.from(grad, Math.abs));
  const len = (g) => -g * scale;
  const mx = (pred[0] + pred[2]) / 2;
  const my = (pred[1] + pred[3]) / 2;
  bctx.strokeStyle = bctx.fillStyle = "#c33";
  bctx.lineWidth = 1.5;
  arrow(pred[0], my, len(grad[0]), 0);
  arrow(mx, pred[1], 0, len(grad[1]));
  arrow(pred[2], my, len(grad[2]), 0);
  arrow(mx, pred[3], 0, len(grad[3]));
}

function pointer(e) {
  const r = boxes.getBoundingClientRect();
  return [e.clientX - r.left, e.clientY - r.top];
}

boxes.addEventListener("pointerdown", (e) => {
  const [x, y] = pointer(e);
  if (Math.abs(x - pred[2]) < 8 && Math.abs(y - pred[3]) < 8) drag = { kind: "corner" };
  else if (x > pred[0] && x < pred[2] && y > pred[1] && y < pred[3]) drag = { kind: "move", x, y, start: pred.slice() };
  if (drag) boxes.setPointerCapture(e.pointerId);
});

boxes.addEventListener("pointermove", (e) => {
  if (!drag) return;
  const [x, y] = pointer(e);
  if (drag.kind === "corner") {
    pred = [pred[0], pred[1], Math.max(pred[0] + 1, x), Math.max(pred[1] + 1, y)];
  } else {
    const dx = x - drag.x;
    const dy = y - drag.y;
    const s = drag.start;
    pred = [s[0] + dx, s[1] + dy, s[2] + dx, s[3] + dy];
  }
  updateLoss();
});

boxes.addEventListener("pointerup", () => { drag = null; });
for (const id of ["alpha", "beta"]) $(id).addEventListener("input", updateLoss);

regenerate();
updateLoss();
