import init, { simulateFrame, associateFrame, costProfile } from './pkg/crossview_demo.js';

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

let frame = null;
let result = null;
let profile = null;

function params() {
  return JSON.stringify({
    scene: { n_subjects: num('n'), alpha_deg: num('alpha'), min_visible: num('minvis') },
    noise: { hor_cx_sigma: num('cxsd'), hor_h_sigma_rel: num('hsd') },
  });
}

function config() {
  return JSON.stringify({
    alpha_deg: num('alpha'),
    delta_theta_deg: num('dtheta'),
    rho: num('rho'),
    lambda: num('lambda'),
    variant: $('variant').value,
    handle_occlusion: $('occ').checked,
  });
}

function status(text, cls = '') {
  $('status').className = cls;
  $('status').textContent = text;
}

function fitTop() {
  const xs = frame.top.map((s) => s.x), ys = frame.top.map((s) => s.y);
  const x0 = Math.min(...xs), y0 = Math.min(...ys);
  const span = Math.max(Math.max(...xs) - x0, Math.max(...ys) - y0, 1);
  const c = $('top'), pad = 24, k = (c.width - 2 * pad) / span;
  return { k, map: (x, y) => [pad + (x - x0) * k, pad + (y - y0) * k] };
}

function wedge(ctx, p, thetaDeg, alphaDeg, len, style) {
  const t = (thetaDeg * Math.PI) / 180, a = (alphaDeg * Math.PI) / 360;
  ctx.fillStyle = style;
  ctx.beginPath();
  ctx.moveTo(p[0], p[1]);
  ctx.arc(p[0], p[1], len, t - a, t + a);
  ctx.closePath();
  ctx.fill();
}

function pairColour(topId) {
  if (!result) return '#555';
  const pred = result.pairs.find((p) => p[0] === topId);
  if (!pred) return '#555';
  const ok = frame.gt_pairs.some((g) => g[0] === pred[0] && g[1] === pred[1]);
  return ok ? '#2a7' : '#c33';
}

function drawTop() {
  const c = $('top'), ctx = c.getContext('2d');
  ctx.clearRect(0, 0, c.width, c.height);
  const { map } = fitTop();
  const alpha = num('alpha');
  const wearer = frame.top.find((s) => s.id === frame.wearer);
  wedge(ctx, map(wearer.x, wearer.y), frame.theta_true_deg, alpha, c.width, 'rgba(0,0,0,0.07)');
  if (result) {
    const w = frame.top[result.wearer_index];
    wedge(ctx, map(w.x, w.y), result.theta_deg, alpha, c.width, 'rgba(40,120,220,0.15)');
  }
  ctx.font = '11px sans-serif';
  for (const s of frame.top) {
    const [x, y] = map(s.x, s.y);
    ctx.fillStyle = pairColour(s.id);
    ctx.beginPath();
    ctx.arc(x, y, 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillText(String(s.id), x + 7, y - 7);
    if (s.id === frame.wearer) {
      ctx.strokeStyle = '#000';
      ctx.beginPath();
      ctx.arc(x, y, 9, 0, 2 * Math.PI);
      ctx.stroke();
    }
  }
}

function drawHor() {
  const c = $('hor'), ctx = c.getContext('2d');
  ctx.clearRect(0, 0, c.width, c.height);
  const k = c.width / frame.hor_width;
  ctx.font = '11px sans-serif';
  for (const b of [...frame.hor].sort((a, b) => a.h - b.h)) {
    const w = 0.35 * b.h * k, h = b.h * k;
    const x = b.cx * k - w / 2, y = c.height / 2 - h / 2;
    const pred = result && result.pairs.find((p) => p[1] === b.id);
    ctx.strokeStyle = pred ? pairColour(pred[0]) : '#555';
    ctx.strokeRect(x, y, w, h);
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(pred ? `${b.id} ↔ ${pred[0]}` : String(b.id), x, y - 3);
  }
}

function drawPlot() {
  const c = $('plot'), ctx = c.getContext('2d');
  ctx.clearRect(0, 0, c.width, c.height);
  if (!profile) return;
  const finite = profile.filter((r) => r[1] !== null && r[1] > 0);
  if (!finite.length) return;
  const logs = finite.map((r) => Math.log10(r[1]));
  const lo = Math.min(...logs), hi = Math.max(...logs) || lo + 1;
  const pad = 20;
  const X = (t) => pad + (t / 360) * (c.width - 2 * pad);
  const Y = (v) => c.height - pad - ((Math.log10(v) - lo) / (hi - lo || 1)) * (c.height - 2 * pad);
  ctx.strokeStyle = '#2878dc';
  ctx.beginPath();
  let pen = false;
  for (const [t, v] of profile) {
    if (v === null || v <= 0) { pen = false; continue; }
    if (pen) ctx.lineTo(X(t), Y(v)); else ctx.moveTo(X(t), Y(v));
    pen = true;
  }
  ctx.stroke();
  if (frame.theta_true_deg !== undefined) {
    ctx.strokeStyle = '#999';
    ctx.beginPath();
    ctx.moveTo(X(frame.theta_true_deg), pad);
    ctx.lineTo(X(frame.theta_true_deg), c.height - pad);
    ctx.stroke();
  }
  ctx.fillStyle = '#222';
  ctx.fillText('log cost vs view angle (grey: true angle)', pad, 12);
}

function redraw() {
  drawTop();
  drawHor();
  drawPlot();
}

function fillCandidates() {
  const sel = $('candidate');
  sel.innerHTML = '';
  frame.top.forEach((s, i) => {
    const o = document.createElement('option');
    o.value = String(i);
    o.textContent = `#${i} (id ${s.id})${s.id === frame.wearer ? ' true wearer' : ''}`;
    sel.appendChild(o);
  });
}

function guard(fn) {
  return () => {
    try { fn(); } catch (e) { status(String(e.message || e), 'bad'); }
  };
}

$('simulate').onclick = guard(() => {
  frame = JSON.parse(simulateFrame(params(), num('seed')));
  result = null;
  profile = null;
  fillCandidates();
  status(`${frame.top.length} overhead, ${frame.hor.length} egocentric detections; true wearer ${frame.wearer}, angle ${frame.theta_true_deg.toFixed(2)} deg`);
  redraw();
});

$('associate').onclick = guard(() => {
  if (!frame) return;
  const t0 = performance.now();
  result = JSON.parse(associateFrame(JSON.stringify(frame), config()));
  const ms = (performance.now() - t0).toFixed(0);
  const correct = result.pairs.filter((p) => frame.gt_pairs.some((g) => g[0] === p[0] && g[1] === p[1])).length;
  const ok = result.wearer_id === frame.wearer;
  $('candidate').value = String(result.wearer_index);
  status(
    `wearer ${result.wearer_id} (${ok ? 'correct' : 'wrong'}), angle ${result.theta_deg.toFixed(1)} deg, ` +
    `cost ${result.phi.toExponential(3)}, ${correct}/${result.pairs.length} pairs correct of ${frame.gt_pairs.length}, ${ms} ms`,
    ok ? 'ok' : 'bad',
  );
  redraw();
});

$('profile').onclick = guard(() => {
  if (!frame) return;
  profile = JSON.parse(costProfile(JSON.stringify(frame), config(), num('candidate')));
  drawPlot();
});

await init();
$('simulate').click();
