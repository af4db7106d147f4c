/** Trailing-edge debounce: rapid call bursts collapse into one invocation
 * after `delayMs` of quiet. */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  delayMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | null = null;
  return (...args: A) => {
    if (timer !== null) clearTimeout(timer);
    timer = setTimeout(() => {
      timer = null;
      fn(...args);
    }, delayMs);
  };
}

/** Latest-wins gate for async requests: each start() invalidates all earlier
 * tokens, and results are applied only if their token is still current. */
export class RequestGate {
  private token = 0;
  private inFlight = 0;

  start(): number {
    this.inFlight += 1;
    return ++this.token;
  }

  settle(token: number): boolean {
    this.inFlight -= 1;
    return token === this.token;
  }

  pending(): number {
    return this.inFlight;
  }
}
