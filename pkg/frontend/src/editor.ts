import { ApiClient, ServiceError, previewUrl } from "./api.js";
import { RequestGate, debounce } from "./debounce.js";
import { HistoryStack } from "./history.js";
import {
  initialState,
  renderPayload,
  withManifoldLatent,
  withMaterial,
  withSlider,
} from "./state.js";
import { Code, EditorState, MaterialInfo, cloneState } from "./types.js";

export interface EditorView {
  setSliders(code: Code): void;
  setPreview(url: string): void;
  setCursor(pt: [number, number] | null): void;
  setExtrapolated(flag: boolean): void;
  showBanner(message: string): void;
  clearBanner(): void;
  setUndoRedo(canUndo: boolean, canRedo: boolean): void;
  setMaterials(materials: MaterialInfo[]): void;
}

export const DEBOUNCE_MS = 100;

/** Controller: committed state lives in the history stack (the UI is a pure
 * function of its top); slider streams are debounced into commits; at most
 * one render request is in flight, newer edits queue behind it and stale
 * responses are dropped (latest wins). */
export class Editor {
  private state: EditorState = initialState();
  private pending: EditorState | null = null;
  private queued: (() => void) | null = null;
  private readonly history = new HistoryStack<EditorState>(cloneState);
  private readonly gate = new RequestGate();
  private readonly commitSliders: () => void;
  private readonly commitDrag: (x: number, y: number) => void;

  constructor(
    private readonly api: ApiClient,
    private readonly view: EditorView,
    debounceMs: number = DEBOUNCE_MS,
  ) {
    this.history.push(this.state);
    this.commitSliders = debounce(() => this.flushSliderEdit(), debounceMs);
    this.commitDrag = debounce((x, y) => this.flushDrag(x, y), debounceMs);
  }

  async start(): Promise<void> {
    try {
      const materials = await this.api.materials();
      this.view.setMaterials(materials);
      this.view.clearBanner();
    } catch (err) {
      this.view.showBanner(describe(err));
    }
    this.view.setSliders(this.state.code);
    this.view.setUndoRedo(false, false);
    await this.refreshPreview(this.state);
  }

  currentState(): EditorState {
    return cloneState(this.state);
  }

  requestsInFlight(): number {
    return this.gate.pending();
  }

  /** Live slider movement: immediate visual feedback, debounced commit. */
  onSliderChange(dim: number, value: number): void {
    this.pending = withSlider(this.pending ?? this.state, dim, value);
    this.view.setSliders(this.pending.code);
    this.commitSliders();
  }

  /** Drag on the manifold pane: debounced inverse-map request. */
  onManifoldDrag(x: number, y: number): void {
    this.view.setCursor([x, y]);
    this.commitDrag(x, y);
  }

  async selectMaterial(name: string, mu: number[]): Promise<void> {
    this.pending = null;
    await this.commitState(withMaterial(this.state, name, mu));
  }

  undo(): void {
    const prev = this.history.undo();
    if (prev) this.restore(prev);
  }

  redo(): void {
    const next = this.history.redo();
    if (next) this.restore(next);
  }

  private restore(snapshot: EditorState): void {
    this.pending = null;
    this.state = snapshot;
    this.view.setSliders(snapshot.code);
    this.view.setCursor(snapshot.cursor);
    this.syncUndoRedo();
    void this.refreshPreview(snapshot);
  }

  private flushSliderEdit(): void {
    if (this.pending === null) return;
    const next = this.pending;
    this.pending = null;
    void this.commitState(next);
  }

  private async commitState(next: EditorState): Promise<void> {
    await this.serialized(async () => {
      const token = this.gate.start();
      let result;
      let error: unknown = null;
      try {
        result = await this.api.render(next.code, renderPayload(next).scene);
      } catch (err) {
        error = err;
      }
      const latest = this.gate.settle(token);
      if (!latest) return;
      if (error !== null || result === undefined) {
        // edit rejected: keep the committed state, resync the controls
        this.view.showBanner(describe(error));
        this.view.setSliders(this.state.code);
        this.view.setCursor(this.state.cursor);
        return;
      }
      this.state = next;
      this.history.push(next);
      this.view.clearBanner();
      this.view.setPreview(previewUrl(result.preview_png));
      this.view.setSliders(next.code);
      this.view.setCursor(next.cursor);
      this.syncUndoRedo();
    });
  }

  private async flushDrag(x: number, y: number): Promise<void> {
    await this.serialized(async () => {
      const token = this.gate.start();
      let result;
      let error: unknown = null;
      try {
        result = await this.api.invert(x, y, renderPayload(this.state).scene);
      } catch (err) {
        error = err;
      }
      const latest = this.gate.settle(token);
      if (!latest) return;
      if (error !== null || result === undefined) {
        this.view.showBanner(describe(error));
        this.view.setCursor(this.state.cursor); // revert the cursor
        return;
      }
      const next = withManifoldLatent(this.state, result.latent, [x, y]);
      this.state = next;
      this.history.push(next);
      this.view.clearBanner();
      this.view.setExtrapolated(result.extrapolated);
      this.view.setPreview(previewUrl(result.preview_png));
      this.view.setSliders(next.code);
      this.view.setCursor(next.cursor);
      this.syncUndoRedo();
    });
  }

  private async refreshPreview(state: EditorState): Promise<void> {
    await this.serialized(async () => {
      const token = this.gate.start();
      try {
        const result = await this.api.render(state.code, renderPayload(state).scene);
        if (this.gate.settle(token)) {
          this.view.setPreview(previewUrl(result.preview_png));
        }
      } catch (err) {
        if (this.gate.settle(token)) this.view.showBanner(describe(err));
      }
    });
  }

  /** Run `task` now if the wire is idle, else queue it (latest only). */
  private async serialized(task: () => Promise<void>): Promise<void> {
    if (this.gate.pending() > 0) {
      this.queued = () => void task().finally(() => this.drainQueue());
      return;
    }
    await task();
    this.drainQueue();
  }

  private drainQueue(): void {
    const next = this.queued;
    this.queued = null;
    if (next) next();
  }

  private syncUndoRedo(): void {
    this.view.setUndoRedo(this.history.canUndo(), this.history.canRedo());
  }
}

function describe(err: unknown): string {
  if (err instanceof ServiceError) {
    return err.status === 0 ? `service unreachable (${err.message})` : err.message;
  }
  return String(err);
}
