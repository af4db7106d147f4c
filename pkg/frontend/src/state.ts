import {
  CODE_LENGTH,
  Code,
  DEFAULT_SCENE,
  EditorState,
  LATENT_LENGTH,
  augmentLatent,
  cloneState,
  zeroCode,
} from "./types.js";

/** Pure state transitions; the editor derives everything else from these. */

export function initialState(): EditorState {
  return {
    code: zeroCode(),
    baseMaterial: null,
    cursor: null,
    scene: { ...DEFAULT_SCENE, light_dir: [...DEFAULT_SCENE.light_dir] },
  };
}

export function withSlider(s: EditorState, dim: number, value: number): EditorState {
  if (dim < 1 || dim > CODE_LENGTH) {
    throw new Error(`slider dimension must be 1..${CODE_LENGTH}, got ${dim}`);
  }
  if (!Number.isFinite(value)) {
    throw new Error("slider value must be finite");
  }
  const next = cloneState(s);
  next.code[dim - 1] = value;
  return next;
}

export function withMaterial(s: EditorState, name: string, mu: number[]): EditorState {
  const next = cloneState(s);
  next.baseMaterial = name;
  next.code = augmentLatent(mu);
  next.cursor = null;
  return next;
}

/** Manifold inversion replaces only the 8 learned dimensions; the manual
 * green controls follow the repurposed color dimensions (neutral choice). */
export function withManifoldLatent(
  s: EditorState,
  latent: number[],
  cursor: [number, number],
): EditorState {
  if (latent.length !== LATENT_LENGTH) {
    throw new Error(`expected ${LATENT_LENGTH} latent values, got ${latent.length}`);
  }
  const next = cloneState(s);
  next.code = [...latent, latent[0], latent[7]];
  next.cursor = [cursor[0], cursor[1]];
  return next;
}

export function withPreviewSize(s: EditorState, size: number): EditorState {
  const next = cloneState(s);
  next.scene.size = size;
  return next;
}

export function withExposure(s: EditorState, exposure: number): EditorState {
  const next = cloneState(s);
  next.scene.exposure = exposure;
  return next;
}

export function renderPayload(s: EditorState): { code: Code; scene: object } {
  return {
    code: [...s.code],
    scene: {
      size: s.scene.size,
      light_dir: [...s.scene.light_dir],
      exposure: s.scene.exposure,
    },
  };
}
