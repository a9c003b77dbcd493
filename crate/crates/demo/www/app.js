import init, { DemoSim, kernel_surface, piano_eigenvalue } from './pkg/backstep2d_demo.js';

const N = 61;                 // grid resolution for the interactive run
const SIM_TIME_PER_SECOND = 0.05;

const fieldCanvas = document.getElementById('field');
const normCanvas = document.getElementById('norms');
const kernelCanvas = document.getElementById('kernel');
const lambdaSlider = document.getElementById('lambda');
const lambdaLabel = document.getElementById('lambda-value');
const controlBox = document.getElementById('control');
const resetButton = document.getElementById('reset');
const statusLine = document.getElementById('status');

let sim = null;
let classes = null;
let normHistory = [];
let eigenvalue = NaN;

function rebuild() {
  const lambda = parseFloat(lambdaSlider.value);
  lambdaLabel.textContent = lambda.toFixed(1);
  try {
    sim = new DemoSim(lambda, N, controlBox.checked);
  } catch (err) {
    statusLine.innerHTML = `<b class="diverged">${err}</b>`;
    sim = null;
    return;
  }
  classes = sim.classes();
  normHistory = [[0, sim.norm()]];
  drawKernel(lambda);
}

// blue-white-red centered at zero, exterior grey, controlled row outlined
function drawField() {
  const n = sim.n();
  const values = sim.field();
  const scale = Math.max(sim.max_abs(), 1e-12);
  const image = new ImageData(n, n);
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const cls = classes[i * n + j];
      const px = 4 * ((n - 1 - j) * n + i); // flip y so the graph boundary is on top
      if (cls === 3) {
        image.data[px] = 235; image.data[px + 1] = 235; image.data[px + 2] = 235;
      } else {
        const u = Math.max(-1, Math.min(1, values[i * n + j] / scale));
        if (u >= 0) {
          image.data[px] = 255; image.data[px + 1] = 255 * (1 - u); image.data[px + 2] = 255 * (1 - u);
        } else {
          image.data[px] = 255 * (1 + u); image.data[px + 1] = 255 * (1 + u); image.data[px + 2] = 255;
        }
        if (cls === 2) { // controlled boundary nodes tinted green
          image.data[px + 1] = Math.min(255, image.data[px + 1] * 0.6 + 120);
        }
      }
      image.data[px + 3] = 255;
    }
  }
  const ctx = fieldCanvas.getContext('2d');
  createImageBitmap(image).then((bitmap) => {
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(bitmap, 0, 0, fieldCanvas.width, fieldCanvas.height);
  });
}

function drawNorms() {
  const ctx = normCanvas.getContext('2d');
  const w = normCanvas.width, h = normCanvas.height;
  ctx.clearRect(0, 0, w, h);
  if (normHistory.length < 2) return;
  const finite = normHistory.filter(([, v]) => isFinite(v) && v > 0);
  if (finite.length < 2) return;
  const tMax = finite[finite.length - 1][0];
  let logMin = Infinity, logMax = -Infinity;
  for (const [, v] of finite) {
    const lv = Math.log10(v);
    logMin = Math.min(logMin, lv);
    logMax = Math.max(logMax, lv);
  }
  if (logMax - logMin < 0.5) { logMax += 0.25; logMin -= 0.25; }
  ctx.strokeStyle = '#888';
  ctx.strokeRect(0.5, 0.5, w - 1, h - 1);
  ctx.strokeStyle = '#06c';
  ctx.beginPath();
  for (const [t, v] of finite) {
    const x = (t / Math.max(tMax, 1e-12)) * (w - 10) + 5;
    const y = h - 5 - ((Math.log10(v) - logMin) / (logMax - logMin)) * (h - 10);
    if (t === finite[0][0]) ctx.moveTo(x, y); else ctx.lineTo(x, y);
  }
  ctx.stroke();
  ctx.fillStyle = '#333';
  ctx.font = '11px system-ui';
  ctx.fillText(`10^${logMax.toFixed(1)}`, 6, 14);
  ctx.fillText(`10^${logMin.toFixed(1)}`, 6, h - 8);
}

function drawKernel(lambda) {
  const kn = 81;
  const surface = kernel_surface(lambda, kn);
  let amp = 1e-12;
  for (const v of surface) amp = Math.max(amp, Math.abs(v));
  const image = new ImageData(kn, kn);
  for (let j = 0; j < kn; j++) {
    for (let k = 0; k < kn; k++) {
      const px = 4 * ((kn - 1 - j) * kn + k);
      if (k > j) {
        image.data[px] = 245; image.data[px + 1] = 245; image.data[px + 2] = 245;
      } else {
        const u = surface[j * kn + k] / amp;
        if (u >= 0) {
          image.data[px] = 255; image.data[px + 1] = 255 * (1 - u); image.data[px + 2] = 255 * (1 - u);
        } else {
          image.data[px] = 255 * (1 + u); image.data[px + 1] = 255 * (1 + u); image.data[px + 2] = 255;
        }
      }
      image.data[px + 3] = 255;
    }
  }
  const ctx = kernelCanvas.getContext('2d');
  createImageBitmap(image).then((bitmap) => {
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(bitmap, 0, 0, kernelCanvas.width, kernelCanvas.height);
  });
}

function frame() {
  if (sim && !sim.diverged()) {
    const steps = Math.max(1, Math.round(SIM_TIME_PER_SECOND / 60 / sim.dt()));
    const norm = sim.step_many(steps);
    normHistory.push([sim.time(), norm]);
    if (normHistory.length > 2000) normHistory.shift();
    drawField();
    drawNorms();
    const state = sim.diverged()
      ? '<b class="diverged">diverged (open loop is unstable here)</b>'
      : `t = ${sim.time().toFixed(3)}&nbsp; ||v|| = ${sim.norm().toExponential(2)}`;
    statusLine.innerHTML =
      `${state} &nbsp;|&nbsp; &lambda;&#770;<sub>1</sub>(&Omega;) &asymp; ${eigenvalue.toFixed(2)}`;
  }
  requestAnimationFrame(frame);
}

async function main() {
  await init();
  eigenvalue = piano_eigenvalue(N);
  // mark the stability threshold on the slider scale
  lambdaSlider.title = `open loop flips unstable above ${eigenvalue.toFixed(2)}`;
  lambdaSlider.addEventListener('input', rebuild);
  controlBox.addEventListener('change', rebuild);
  resetButton.addEventListener('click', rebuild);
  rebuild();
  requestAnimationFrame(frame);
}

main();
