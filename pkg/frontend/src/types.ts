export const CODE_LENGTH = 10;
export const LATENT_LENGTH = 8;

/** 10-parameter editing vector: 8 learned + green-diffuse + green-specular. */
export type Code = number[];

export interface SceneSettings {
  size: number;
  light_dir: [number, number, number];
  exposure: number;
}

export interface EditorState {
  code: Code;
  baseMaterial: string | null;
  cursor: [number, number] | null;
  scene: SceneSettings;
}

export interface MaterialInfo {
  name: string;
  mu: number[];
  sigma: number[];
}

export interface ManifoldData {
  names: string[];
  points: [number, number][];
  latents: number[][];
  bounding_box: [number, number, number, number];
}

export const DEFAULT_SCENE: SceneSettings = {
  size: 128,
  light_dir: [0.378, 0.378, 0.845],
  exposure: 1.0,
};

export const SLIDER_MIN = -3;
export const SLIDER_MAX = 3;

/** Per-dimension slider ranges, in latent units (three prior standard
 * deviations by default; widen individual entries if a material's stored
 * latents fall outside). */
export const SLIDER_RANGES: [number, number][] = new Array(10)
  .fill(null)
  .map(() => [SLIDER_MIN, SLIDER_MAX]);

/** Suggested names for one trained instance; operators can rename them. */
export const PARAMETER_SUGGESTIONS: string[] = [
  "diffuse color (blue to red)",
  "sheen",
  "subsurface",
  "clear coat",
  "specular to diffuse",
  "haziness",
  "color lightness",
  "specular color (red to blue)",
  "green diffuse",
  "green specular",
];

export function zeroCode(): Code {
  return new Array(CODE_LENGTH).fill(0);
}

/** Neutral 10-code: green controls start at the parameters they repurpose. */
export function augmentLatent(mu: number[]): Code {
  if (mu.length !== LATENT_LENGTH) {
    throw new Error(`expected ${LATENT_LENGTH} latent values, got ${mu.length}`);
  }
  return [...mu, mu[0], mu[7]];
}

export function cloneState(s: EditorState): EditorState {
  return {
    code: [...s.code],
    baseMaterial: s.baseMaterial,
    cursor: s.cursor ? [s.cursor[0], s.cursor[1]] : null,
    scene: { ...s.scene, light_dir: [...s.scene.light_dir] },
  };
}

export function statesEqual(a: EditorState, b: EditorState): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}
