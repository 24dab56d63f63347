/**
 * Exact rational arithmetic over bigint.
 *
 * Scores are fractions of decimal weights, never floats, so ordering
 * and threshold comparisons here agree with the service for any input.
 * Weights travel as JSON numbers; `fromNumber` converts through the
 * shortest decimal rendering, which names the same rational on both
 * sides of the wire.
 */

export interface Frac {
  readonly n: bigint;
  readonly d: bigint; // always positive, fraction always reduced
}

export const ZERO: Frac = { n: 0n, d: 1n };

function gcd(a: bigint, b: bigint): bigint {
  a = a < 0n ? -a : a;
  b = b < 0n ? -b : b;
  while (b) {
    [a, b] = [b, a % b];
  }
  return a;
}

export function frac(n: bigint, d: bigint): Frac {
  if (d === 0n) throw new RangeError("zero denominator");
  if (d < 0n) {
    n = -n;
    d = -d;
  }
  const g = gcd(n, d) || 1n;
  return { n: n / g, d: d / g };
}

const DECIMAL = /^([+-]?)(\d+)(?:\.(\d+))?(?:[eE]([+-]?\d+))?$/;

/** Parse a decimal literal such as "0.25", "3" or "1e-7" exactly. */
export function fromDecimal(text: string): Frac {
  const m = DECIMAL.exec(text.trim());
  if (!m) throw new RangeError(`not a decimal literal: ${text}`);
  const sign = m[1] === "-" ? -1n : 1n;
  const whole = m[2]!;
  const fracDigits = m[3] ?? "";
  const exp = m[4] ? parseInt(m[4], 10) : 0;
  let n = BigInt(whole + fracDigits);
  let scale = fracDigits.length - exp;
  let d = 1n;
  if (scale > 0) d = 10n ** BigInt(scale);
  else if (scale < 0) n *= 10n ** BigInt(-scale);
  return frac(sign * n, d);
}

/** The rational named by the number's shortest decimal form. */
export function fromNumber(x: number): Frac {
  if (!Number.isFinite(x)) throw new RangeError(`not finite: ${x}`);
  return fromDecimal(String(x));
}

export function add(a: Frac, b: Frac): Frac {
  return frac(a.n * b.d + b.n * a.d, a.d * b.d);
}

export function div(a: Frac, b: Frac): Frac {
  if (b.n === 0n) throw new RangeError("division by zero");
  return frac(a.n * b.d, a.d * b.n);
}

/** -1, 0 or 1 as a is below, equal to or above b. */
export function cmp(a: Frac, b: Frac): number {
  const left = a.n * b.d;
  const right = b.n * a.d;
  return left < right ? -1 : left > right ? 1 : 0;
}

export function eq(a: Frac, b: Frac): boolean {
  return a.n === b.n && a.d === b.d;
}

export function isZero(a: Frac): boolean {
  return a.n === 0n;
}

function bitLength(x: bigint): number {
  return x === 0n ? 0 : x.toString(2).length;
}

/**
 * Correctly rounded conversion to a double (round half to even), so
 * displayed scores match the service's serialization digit for digit.
 */
export function toNumber(f: Frac): number {
  if (f.n === 0n) return 0;
  const negative = f.n < 0n;
  let n = negative ? -f.n : f.n;
  let d = f.d;

  // scale so the integer quotient n/d carries 54 or 55 bits
  let exponent = bitLength(n) - bitLength(d) - 54;
  if (exponent > 0) d <<= BigInt(exponent);
  else if (exponent < 0) n <<= BigInt(-exponent);

  let q = n / d;
  let inexact = n % d !== 0n;
  if (q >= 1n << 54n) {
    if (q & 1n) inexact = true;
    q >>= 1n;
    exponent += 1;
  }
  // q now has exactly 54 bits; the lowest is the rounding bit
  const roundBit = q & 1n;
  q >>= 1n;
  exponent += 1;
  if (roundBit && (inexact || (q & 1n))) q += 1n;
  if (q === 1n << 53n) {
    q >>= 1n;
    exponent += 1;
  }
  const magnitude = Number(q) * 2 ** exponent;
  return negative ? -magnitude : magnitude;
}
