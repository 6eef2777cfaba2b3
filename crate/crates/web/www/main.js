import init, { explore, random_family, green_slice } from "./pkg/qasmap_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
let lastFamily = null;

function show(id, f) {
  try {
    $(id).textContent = JSON.stringify(JSON.parse(f()), null, 2);
  } catch (e) {
    $(id).textContent = String(e.message ?? e);
  }
}

// "1, 0:1, -2" -> [1, 0, 0, 1, -2, 0]
function complexVec(s) {
  return Float64Array.from(
    s.split(",").flatMap((part) => {
      const [re, im = "0"] = part.trim().split(":");
      return [Number(re), Number(im)];
    }),
  );
}

function render() {
  const res = num("res");
  const t0 = performance.now();
  try {
    const px = green_slice(
      $("map").value, num("iters"), res,
      complexVec($("base").value), complexVec($("e1").value), complexVec($("e2").value),
      num("xlo"), num("xhi"), num("ylo"), num("yhi"),
    );
    const canvas = $("canvas");
    canvas.width = canvas.height = res;
    // Grid rows run upward in y; flip so y grows toward the top.
    const flipped = new Uint8ClampedArray(px.length);
    const row = res * 4;
    for (let j = 0; j < res; j++) flipped.set(px.subarray(j * row, (j + 1) * row), (res - 1 - j) * row);
    canvas.getContext("2d").putImageData(new ImageData(flipped, res, res), 0, 0);
    $("render-status").textContent = `${res}x${res} in ${(performance.now() - t0).toFixed(0)} ms`;
  } catch (e) {
    $("render-status").textContent = String(e.message ?? e);
  }
}

await init();
$("explore").onclick = () => show("explore-out", () => explore($("map").value, num("depth")));
$("family").onclick = () =>
  show("family-out", () => {
    const out = random_family(BigInt(num("seed")), num("degp"), num("degq"), BigInt(num("bound")));
    lastFamily = JSON.parse(out).family;
    return out;
  });
$("use-family").onclick = () => {
  if (lastFamily) $("map").value = lastFamily;
};
$("render").onclick = render;
