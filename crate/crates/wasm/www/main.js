import init, { report, curve, instance } from "./pkg/ris_dof_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => parseInt($(id).value, 10);
const antennas = () => [num("m1"), num("m2"), num("n1"), num("n2")];

function guard(fn) {
  return () => {
    $("error").textContent = "";
    try {
      fn();
    } catch (e) {
      $("error").textContent = String(e);
    }
  };
}

function showReport() {
  const rep = JSON.parse(report(...antennas(), num("r")));
  const c = rep.config;
  const lines = [
    `canonical  M1=${c.m1} M2=${c.m2} N1=${c.n1} N2=${c.n2}${c.swapped ? " (users relabeled)" : ""}`,
  ];
  for (const e of rep.per_case) {
    lines.push(`${e.case.padEnd(8)} sum-DoF ${e.sumdof}  f1=${e.plan.f1} f2=${e.plan.f2} cost ${e.plan.cost}`);
  }
  lines.push(`achievable ${rep.achievable}   baseline ${rep.baseline}   gain ${rep.gain}   RIS helps: ${rep.ris_helps}`);
  $("report").textContent = lines.join("\n");
}

function plotCurve() {
  const rmax = Math.max(1, num("rmax"));
  const step = Math.max(1, Math.floor(rmax / 200));
  const pts = JSON.parse(curve(...antennas(), rmax, step));
  const cv = $("curve");
  const ctx = cv.getContext("2d");
  const pad = 36;
  const w = cv.width - 2 * pad;
  const h = cv.height - 2 * pad;
  const ymax = Math.max(...pts.map((p) => p.achievable)) + 1;
  const x = (r) => pad + (r / rmax) * w;
  const y = (v) => cv.height - pad - (v / ymax) * h;
  ctx.clearRect(0, 0, cv.width, cv.height);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, cv.height - pad);
  ctx.lineTo(cv.width - pad, cv.height - pad);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText("R", cv.width - pad + 6, cv.height - pad + 4);
  ctx.fillText(String(rmax), x(rmax) - 8, cv.height - pad + 14);
  for (let v = 0; v <= ymax; v += Math.max(1, Math.ceil(ymax / 8))) {
    ctx.fillText(String(v), 8, y(v) + 4);
  }
  const line = (key, color) => {
    ctx.strokeStyle = color;
    ctx.beginPath();
    pts.forEach((p, i) => {
      const px = x(p.r);
      const py = y(p[key]);
      if (i === 0) ctx.moveTo(px, py);
      else {
        ctx.lineTo(px, y(pts[i - 1][key]));
        ctx.lineTo(px, py);
      }
    });
    ctx.stroke();
  };
  line("baseline", "#aaa");
  line("achievable", "#1565c0");
}

function heat(title, grid) {
  const cell = 22;
  const rows = grid.length;
  const cols = rows ? grid[0].length : 0;
  const fig = document.createElement("figure");
  const cv = document.createElement("canvas");
  cv.width = Math.max(cols * cell, 40);
  cv.height = Math.max(rows * cell, 20);
  const ctx = cv.getContext("2d");
  grid.forEach((row, i) =>
    row.forEach((v, j) => {
      // -16 (cancelled) maps to black, +1 to white
      const t = Math.min(1, Math.max(0, (v + 16) / 17));
      const g = Math.round(255 * t);
      ctx.fillStyle = `rgb(${g},${g},${Math.min(255, g + 40)})`;
      ctx.fillRect(j * cell, i * cell, cell - 1, cell - 1);
    }),
  );
  const cap = document.createElement("figcaption");
  cap.textContent = title;
  fig.append(cv, cap);
  return fig;
}

function synthesize() {
  const inst = JSON.parse(instance(...antennas(), num("r"), num("seed")));
  $("instance").textContent =
    `${inst.case}  f1=${inst.f1} f2=${inst.f2}  streams ${inst.streams}  ` +
    `high-SNR slope ${inst.slope.toFixed(3)}  max |psi| ${inst.max_psi.toExponential(3)}`;
  const maps = $("maps");
  maps.replaceChildren(
    heat("Tx1 -> Rx1", inst.hbar11),
    heat("Tx2 -> Rx1", inst.hbar21),
    heat("Tx1 -> Rx2", inst.hbar12),
    heat("Tx2 -> Rx2", inst.hbar22),
  );
}

await init();
$("run-report").addEventListener("click", guard(showReport));
$("run-curve").addEventListener("click", guard(plotCurve));
$("run-instance").addEventListener("click", guard(synthesize));
guard(showReport)();
guard(plotCurve)();
