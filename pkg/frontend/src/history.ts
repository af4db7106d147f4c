/** Generic undo/redo stack. The current entry is always `history[index]`;
 * pushing truncates any redo tail, undo/redo only move the index, so a
 * round trip restores the exact same snapshot object content. */
export class HistoryStack<T> {
  private history: T[] = [];
  private index = -1;

  constructor(private readonly clone: (v: T) => T, private readonly limit = 200) {}

  push(value: T): void {
    this.history = this.history.slice(0, this.index + 1);
    this.history.push(this.clone(value));
    if (this.history.length > this.limit) {
      this.history.shift();
    }
    this.index = this.history.length - 1;
  }

  current(): T {
    if (this.index < 0) {
      throw new Error("history is empty");
    }
    return this.clone(this.history[this.index]);
  }

  canUndo(): boolean {
    return this.index > 0;
  }

  canRedo(): boolean {
    return this.index < this.history.length - 1;
  }

  undo(): T | null {
    if (!this.canUndo()) return null;
    this.index -= 1;
    return this.current();
  }

  redo(): T | null {
    if (!this.canRedo()) return null;
    this.index += 1;
    return this.current();
  }

  /** Undo all the way to a given depth from the start. */
  jumpTo(position: number): T | null {
    if (position < 0 || position >= this.history.length) return null;
    this.index = position;
    return this.current();
  }

  size(): number {
    return this.history.length;
  }

  position(): number {
    return this.index;
  }
}
