// Exact beat arithmetic. Lead sheets carry onsets/durations as integer
// [numerator, denominator] pairs, and frame boundaries must be computed
// exactly or notes sitting right on a boundary land in the wrong frame.

export interface Rat {
  n: number;
  d: number; // always > 0, gcd(n, d) = 1
}

function gcd(a: number, b: number): number {
  a = Math.abs(a);
  b = Math.abs(b);
  while (b !== 0) {
    [a, b] = [b, a % b];
  }
  return a;
}

export function rat(n: number, d = 1): Rat {
  if (!Number.isInteger(n) || !Number.isInteger(d)) {
    throw new Error(`rational parts must be integers: ${n}/${d}`);
  }
  if (d === 0) throw new Error("zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const g = gcd(n, d) || 1;
  return { n: n / g, d: d / g };
}

export function add(a: Rat, b: Rat): Rat {
  return rat(a.n * b.d + b.n * a.d, a.d * b.d);
}

export function sub(a: Rat, b: Rat): Rat {
  return rat(a.n * b.d - b.n * a.d, a.d * b.d);
}

export function mul(a: Rat, b: Rat): Rat {
  return rat(a.n * b.n, a.d * b.d);
}

// a - b as a sign, without building the intermediate rational
export function cmp(a: Rat, b: Rat): number {
  return Math.sign(a.n * b.d - b.n * a.d);
}

export function ratMin(a: Rat, b: Rat): Rat {
  return cmp(a, b) <= 0 ? a : b;
}

export function ratMax(a: Rat, b: Rat): Rat {
  return cmp(a, b) >= 0 ? a : b;
}

export function toNumber(a: Rat): number {
  return a.n / a.d;
}

// floor(a / b) for positive b, exact on integers (no float quotient)
export function floorDiv(a: Rat, b: Rat): number {
  const p = a.n * b.d;
  const q = a.d * b.n;
  const m = ((p % q) + q) % q;
  return (p - m) / q;
}

// ceil(a / b)
export function ceilDiv(a: Rat, b: Rat): number {
  const p = a.n * b.d;
  const q = a.d * b.n;
  const m = ((p % q) + q) % q;
  return (p - m) / q + (m === 0 ? 0 : 1);
}

export function ratEq(a: Rat, b: Rat): boolean {
  return a.n === b.n && a.d === b.d;
}

export function asPair(a: Rat): [number, number] {
  return [a.n, a.d];
}
