/** Fixed-capacity ring buffer of timestamped samples for strip charts. */
export class RingBuffer {
  private times: Float64Array;
  private values: Float64Array;
  private head = 0;
  private count = 0;

  constructor(private capacity: number, private windowSeconds: number) {
    if (capacity <= 0) throw new Error("capacity must be positive");
    this.times = new Float64Array(capacity);
    this.values = new Float64Array(capacity);
  }

  push(t: number, v: number): void {
    this.times[this.head] = t;
    this.values[this.head] = v;
    this.head = (this.head + 1) % this.capacity;
    if (this.count < this.capacity) this.count++;
  }

  get size(): number {
    return this.count;
  }

  /** Samples no older than windowSeconds before the newest, oldest first. */
  window(): { t: number; v: number }[] {
    const out: { t: number; v: number }[] = [];
    if (this.count === 0) return out;
    const newest =
      this.times[(this.head - 1 + this.capacity) % this.capacity];
    const start = (this.head - this.count + this.capacity) % this.capacity;
    for (let i = 0; i < this.count; i++) {
      const idx = (start + i) % this.capacity;
      if (newest - this.times[idx] <= this.windowSeconds) {
        out.push({ t: this.times[idx], v: this.values[idx] });
      }
    }
    return out;
  }

  latest(): number | undefined {
    if (this.count === 0) return undefined;
    return this.values[(this.head - 1 + this.capacity) % this.capacity];
  }
}
