import { ApiClient } from "./api.js";
import { Editor, EditorView } from "./editor.js";
import { ManifoldView } from "./manifoldView.js";
import {
  CODE_LENGTH,
  Code,
  MaterialInfo,
  PARAMETER_SUGGESTIONS,
  SLIDER_RANGES,
} from "./types.js";

const params = new URLSearchParams(window.location.search);
const SERVICE_URL = params.get("service") ?? "http://127.0.0.1:8321";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function buildSliders(onChange: (dim: number, value: number) => void) {
  const panel = el<HTMLDivElement>("sliders");
  const inputs: HTMLInputElement[] = [];
  const readouts: HTMLSpanElement[] = [];
  for (let dim = 1; dim <= CODE_LENGTH; dim++) {
    const row = document.createElement("div");
    row.className = "slider-row";

    const label = document.createElement("input");
    label.type = "text";
    label.className = "param-name";
    label.value = `${dim}: ${PARAMETER_SUGGESTIONS[dim - 1]}`;
    label.title = "Editable label: rename after inspecting a traversal sheet";

    const slider = document.createElement("input");
    slider.type = "range";
    const [lo, hi] = SLIDER_RANGES[dim - 1];
    slider.min = String(lo);
    slider.max = String(hi);
    slider.step = "0.01";
    slider.value = "0";
    slider.addEventListener("input", () => {
      readout.textContent = Number(slider.value).toFixed(2);
      onChange(dim, Number(slider.value));
    });

    const readout = document.createElement("span");
    readout.className = "value";
    readout.textContent = "0.00";

    row.append(label, slider, readout);
    panel.append(row);
    inputs.push(slider);
    readouts.push(readout);
  }
  return { inputs, readouts };
}

function main(): void {
  const api = new ApiClient(SERVICE_URL);
  const preview = el<HTMLImageElement>("preview");
  const banner = el<HTMLDivElement>("banner");
  const badge = el<HTMLSpanElement>("extrapolated");
  const undoBtn = el<HTMLButtonElement>("undo");
  const redoBtn = el<HTMLButtonElement>("redo");
  const materialSelect = el<HTMLSelectElement>("material");
  const canvas = el<HTMLCanvasElement>("manifold");

  let sliderEls: { inputs: HTMLInputElement[]; readouts: HTMLSpanElement[] };
  let manifoldView: ManifoldView | null = null;
  let materialTable = new Map<string, MaterialInfo>();

  const view: EditorView = {
    setSliders(code: Code) {
      code.forEach((v, i) => {
        sliderEls.inputs[i].value = String(v);
        sliderEls.readouts[i].textContent = v.toFixed(2);
      });
    },
    setPreview(url: string) {
      preview.src = url;
    },
    setCursor(pt) {
      manifoldView?.setCursor(pt);
    },
    setExtrapolated(flag: boolean) {
      badge.style.display = flag ? "inline-block" : "none";
    },
    showBanner(message: string) {
      banner.textContent = message;
      banner.style.display = "block";
    },
    clearBanner() {
      banner.style.display = "none";
    },
    setUndoRedo(canUndo: boolean, canRedo: boolean) {
      undoBtn.disabled = !canUndo;
      redoBtn.disabled = !canRedo;
    },
    setMaterials(materials: MaterialInfo[]) {
      materialTable = new Map(materials.map((m) => [m.name, m]));
      materialSelect.innerHTML = "<option value=''>— material —</option>";
      for (const m of materials) {
        const opt = document.createElement("option");
        opt.value = m.name;
        opt.textContent = m.name;
        materialSelect.append(opt);
      }
    },
  };

  const editor = new Editor(api, view);
  sliderEls = buildSliders((dim, value) => editor.onSliderChange(dim, value));
  manifoldView = new ManifoldView(canvas, (x, y) => editor.onManifoldDrag(x, y));

  undoBtn.addEventListener("click", () => editor.undo());
  redoBtn.addEventListener("click", () => editor.redo());
  materialSelect.addEventListener("change", () => {
    const info = materialTable.get(materialSelect.value);
    if (info) void editor.selectMaterial(info.name, info.mu);
  });

  void editor.start().then(() =>
    api
      .manifold()
      .then((data) => manifoldView?.setData(data))
      .catch(() => view.showBanner("manifold unavailable (serve with --manifold)")),
  );
}

main();
