import init, { classify, fixtures, render, render_manifold, run_manifold } from "./pkg/spaceform_wasm.js";

const $ = (id) => document.getElementById(id);

function show(target, f) {
  try {
    target.textContent = f();
  } catch (e) {
    target.textContent = `error: ${e}`;
  }
}

function draw(f) {
  try {
    $("diagram").innerHTML = f();
  } catch (e) {
    $("diagram").textContent = `error: ${e}`;
  }
}

await init();

for (const name of fixtures()) {
  const opt = document.createElement("option");
  opt.textContent = name;
  $("fixture").appendChild(opt);
}

$("classify").onclick = () => show($("classification"), () => classify($("symbol").value));

$("render").onclick = () => draw(() => render($("solid").value, $("outer").value.trim()));

$("manifold").onclick = () => {
  const name = $("fixture").value;
  try {
    const text = run_manifold(name, $("metric").checked);
    const r = JSON.parse(text);
    const v = r.verification;
    $("summary").textContent = v
      ? `${v.edge_classes} edge classes, ${v.vertex_classes} vertex classes, ${v.face_pairs} face pairs, ` +
        `Euler ${v.euler}, H1 = ${r.homology.text}, exit ${r.exit_status}`
      : `failed: ${r.error.message}`;
    $("report").textContent = text;
    draw(() => render_manifold(name, ""));
  } catch (e) {
    $("summary").textContent = `error: ${e}`;
  }
};

$("classify").click();
