// Request coalescing: drags and slider sweeps fire faster than the solver
// answers, so at most one edit is in flight and only the trailing request
// survives.

export type Task = () => Promise<void>;

export class SingleFlight {
  private inFlight = false;
  private trailing: Task | null = null;
  private _flightCount = 0;
  private _maxConcurrent = 0;

  constructor(private onError: (err: unknown) => void = (err) => console.error(err)) {}

  /** Submit work; if a request is already running, replace the queued one. */
  submit(task: Task): void {
    if (this.inFlight) {
      this.trailing = task;
      return;
    }
    void this.run(task);
  }

  private async run(task: Task): Promise<void> {
    this.inFlight = true;
    this._flightCount += 1;
    this._maxConcurrent = Math.max(this._maxConcurrent, this._flightCount);
    try {
      await task();
    } catch (err) {
      this.onError(err);
    } finally {
      this._flightCount -= 1;
      this.inFlight = false;
      const next = this.trailing;
      this.trailing = null;
      if (next) {
        void this.run(next);
      }
    }
  }

  get busy(): boolean {
    return this.inFlight;
  }

  /** Highest number of simultaneously running tasks ever observed. */
  get maxConcurrent(): number {
    return this._maxConcurrent;
  }

  async idle(): Promise<void> {
    while (this.inFlight || this.trailing) {
      await new Promise((resolve) => setTimeout(resolve, 1));
    }
  }
}

/** Gate live-drag edits to at most one per interval; trailing call wins. */
export class Throttle {
  private last = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: (() => void) | null = null;

  constructor(private intervalMs: number, private now: () => number = Date.now) {}

  call(fn: () => void): void {
    const elapsed = this.now() - this.last;
    if (elapsed >= this.intervalMs) {
      this.last = this.now();
      fn();
      return;
    }
    this.pending = fn;
    if (this.timer === null) {
      this.timer = setTimeout(() => {
        this.timer = null;
        const run = this.pending;
        this.pending = null;
        if (run) {
          this.last = this.now();
          run();
        }
      }, this.intervalMs - elapsed);
    }
  }
}
