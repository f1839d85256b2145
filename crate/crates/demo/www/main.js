// Built by `wasm-bindgen --target web` into ./pkg (see the README).
import init, { simulate, fit_strauss, phase_pair } from "./pkg/gibbsbox_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
let lastCsv = null;

function report(el, err) {
  el.textContent = String(err.message ?? err);
  el.className = "error";
}

// let the button repaint before a long synchronous call
function busy(button, work) {
  button.disabled = true;
  setTimeout(() => {
    try {
      work();
    } finally {
      button.disabled = false;
    }
  }, 10);
}

function runSimulation() {
  const out = $("sim-stats");
  out.className = "";
  const t0 = performance.now();
  try {
    const r = JSON.parse(simulate($("family").value, num("z"), num("beta"), num("radius"),
      num("side"), num("sweeps"), num("seed")));
    $("sim-svg").innerHTML = r.svg;
    lastCsv = r.csv;
    $("run-fit").disabled = false;
    out.textContent = [
      `points      ${r.count}`,
      `energy      ${r.energy.toFixed(4)}`,
      `acceptance  birth ${r.acceptance[0].toFixed(3)}  death ${r.acceptance[1].toFixed(3)}  move ${r.acceptance[2].toFixed(3)}`,
      `proposals   ${r.proposals}`,
      `time        ${(performance.now() - t0).toFixed(0)} ms`,
    ].join("\n");
  } catch (e) {
    report(out, e);
  }
}

function runFit() {
  const out = $("fit-out");
  out.className = "";
  try {
    const r = JSON.parse(fit_strauss(lastCsv, num("side"), num("radius")));
    const line = (e) => `${e.method.padEnd(5)} z = ${e.z_hat.toFixed(4)}  beta = ${e.beta_hat.toFixed(4)}`
      + (e.warnings.length ? `  (${e.warnings.join("; ")})` : "");
    out.textContent = `${r.points} points\n${line(r.tf)}\n${line(r.mple)}`;
  } catch (e) {
    report(out, e);
  }
}

function runPhase() {
  try {
    const r = JSON.parse(phase_pair(num("pz"), num("pside"), num("psweeps"), num("pseed")));
    for (const arm of ["p", "q"]) {
      $(`${arm}-svg`).innerHTML = r[arm].svg;
      $(`${arm}-stats`).textContent =
        `${arm === "p" ? "exclusion band" : "free, shrunk energy"}: ${r[arm].count} points, `
        + `central intensity ${r[arm].intensity.toFixed(3)}`;
    }
  } catch (e) {
    report($("p-stats"), e);
  }
}

init().then(() => {
  $("status").textContent = "ready";
  $("run-sim").addEventListener("click", (ev) => busy(ev.target, runSimulation));
  $("run-fit").addEventListener("click", (ev) => busy(ev.target, runFit));
  $("run-phase").addEventListener("click", (ev) => busy(ev.target, runPhase));
}).catch((e) => report($("status"), e));
