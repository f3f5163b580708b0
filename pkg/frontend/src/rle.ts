// Run-length decoding of the service's patch label payloads.

export function decodeRle(runs: [number, number][], expectedLength?: number): Int32Array {
  let total = 0;
  for (const [, count] of runs) total += count;
  if (expectedLength !== undefined && total !== expectedLength) {
    throw new Error(`RLE decodes to ${total} labels, expected ${expectedLength}`);
  }
  const out = new Int32Array(total);
  let offset = 0;
  for (const [value, count] of runs) {
    out.fill(value, offset, offset + count);
    offset += count;
  }
  return out;
}
