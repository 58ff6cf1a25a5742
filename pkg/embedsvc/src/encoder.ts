/**
 * Deterministic transformer encoder producing per-token contextual
 * embeddings. All weights are derived from a seed via a keyed hash, so a
 * given (name, layers, dim, seed) configuration always produces the same
 * vectors - across calls and across restarts - without any model download.
 */

export interface EncoderConfig {
  name: string;
  dim: number;
  layers: number;
  seed: number;
}

export const DEFAULT_CONFIG: EncoderConfig = {
  name: 'micro-txf-v1',
  dim: 48,
  layers: 2,
  seed: 1234,
};

export interface TokenEmbeddings {
  tokens: string[];
  vectors: number[][];
}

const FNV_OFFSET = 0xcbf29ce484222325n;
const FNV_PRIME = 0x100000001b3n;
const MASK64 = 0xffffffffffffffffn;

function fnv1a(key: string): bigint {
  let h = FNV_OFFSET;
  for (let i = 0; i < key.length; i++) {
    h ^= BigInt(key.charCodeAt(i));
    h = (h * FNV_PRIME) & MASK64;
  }
  return h;
}

/** splitmix64 finalizer over an FNV hash, mapped to [-1, 1). */
function prf(key: string): number {
  let z = (fnv1a(key) + 0x9e3779b97f4a7c15n) & MASK64;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  z = z ^ (z >> 31n);
  return Number(z >> 11n) / 2 ** 52 - 1.0;
}

const BOS = '<s>';
const EOS = '</s>';
const PIECE_LEN = 4;

/**
 * Subword tokenization: lowercase NFC text is split into word and
 * punctuation runs; words longer than PIECE_LEN chars break into pieces,
 * continuations prefixed with "##".
 */
export function tokenize(text: string): string[] {
  const normalized = text.normalize('NFC').toLowerCase();
  const runs = normalized.match(/[\p{L}\p{N}]+|[^\s\p{L}\p{N}]/gu) ?? [];
  const pieces: string[] = [];
  for (const run of runs) {
    for (let i = 0; i < run.length; i += PIECE_LEN) {
      const piece = run.slice(i, i + PIECE_LEN);
      pieces.push(i === 0 ? piece : '##' + piece);
    }
  }
  return pieces;
}

type Matrix = number[][];

function makeMatrix(rows: number, cols: number, key: string, scale: number): Matrix {
  const m: Matrix = [];
  for (let i = 0; i < rows; i++) {
    const row = new Array<number>(cols);
    for (let j = 0; j < cols; j++) {
      row[j] = prf(`${key}/${i},${j}`) * scale;
    }
    m.push(row);
  }
  return m;
}

function matmul(x: Matrix, w: Matrix): Matrix {
  const out: Matrix = [];
  const cols = w[0].length;
  for (const row of x) {
    const o = new Array<number>(cols).fill(0);
    for (let k = 0; k < row.length; k++) {
      const r = row[k];
      if (r === 0) continue;
      const wk = w[k];
      for (let j = 0; j < cols; j++) o[j] += r * wk[j];
    }
    out.push(o);
  }
  return out;
}

function layerNorm(x: Matrix): Matrix {
  return x.map((row) => {
    const mean = row.reduce((a, b) => a + b, 0) / row.length;
    let variance = 0;
    for (const v of row) variance += (v - mean) ** 2;
    variance /= row.length;
    const inv = 1 / Math.sqrt(variance + 1e-6);
    return row.map((v) => (v - mean) * inv);
  });
}

function addInPlace(x: Matrix, y: Matrix): void {
  for (let i = 0; i < x.length; i++) {
    for (let j = 0; j < x[i].length; j++) x[i][j] += y[i][j];
  }
}

interface LayerWeights {
  wq: Matrix;
  wk: Matrix;
  wv: Matrix;
  wo: Matrix;
  w1: Matrix;
  w2: Matrix;
}

export class Encoder {
  readonly config: EncoderConfig;
  private readonly layers: LayerWeights[] = [];

  constructor(config: EncoderConfig = DEFAULT_CONFIG) {
    if (config.dim < 2 || config.layers < 1) {
      throw new Error(`bad encoder config: dim=${config.dim} layers=${config.layers}`);
    }
    this.config = config;
    const { dim, layers, seed, name } = config;
    const hidden = 2 * dim;
    const scale = 1 / Math.sqrt(dim);
    for (let l = 0; l < layers; l++) {
      const key = `${name}/s${seed}/l${l}`;
      this.layers.push({
        wq: makeMatrix(dim, dim, `${key}/wq`, scale),
        wk: makeMatrix(dim, dim, `${key}/wk`, scale),
        wv: makeMatrix(dim, dim, `${key}/wv`, scale),
        wo: makeMatrix(dim, dim, `${key}/wo`, scale),
        w1: makeMatrix(dim, hidden, `${key}/w1`, scale),
        w2: makeMatrix(hidden, dim, `${key}/w2`, 1 / Math.sqrt(hidden)),
      });
    }
  }

  /** Stable identity; embeddings are only comparable within one identity. */
  get identity(): string {
    const { name, layers, dim, seed } = this.config;
    return `${name}@L${layers}d${dim}s${seed}`;
  }

  private tokenVector(token: string): number[] {
    const { dim, seed, name } = this.config;
    const v = new Array<number>(dim);
    for (let i = 0; i < dim; i++) v[i] = prf(`${name}/s${seed}/emb/${token}/${i}`);
    return v;
  }

  /**
   * Encode one text. Boundary tokens participate in attention but are
   * stripped from the returned matrix.
   */
  encode(text: string): TokenEmbeddings {
    const inner = tokenize(text);
    if (inner.length === 0) {
      throw new Error('text has no encodable tokens');
    }
    const tokens = [BOS, ...inner, EOS];
    const { dim } = this.config;

    let x: Matrix = tokens.map((tok, pos) => {
      const v = this.tokenVector(tok);
      for (let i = 0; i < dim; i += 2) {
        const angle = pos / Math.pow(10000, i / dim);
        v[i] += Math.sin(angle);
        if (i + 1 < dim) v[i + 1] += Math.cos(angle);
      }
      return v;
    });
    x = layerNorm(x);

    const invSqrtDim = 1 / Math.sqrt(dim);
    for (const layer of this.layers) {
      const q = matmul(x, layer.wq);
      const k = matmul(x, layer.wk);
      const v = matmul(x, layer.wv);
      const attended: Matrix = [];
      for (let i = 0; i < x.length; i++) {
        const scores = new Array<number>(x.length);
        let max = -Infinity;
        for (let j = 0; j < x.length; j++) {
          let s = 0;
          for (let d = 0; d < dim; d++) s += q[i][d] * k[j][d];
          scores[j] = s * invSqrtDim;
          if (scores[j] > max) max = scores[j];
        }
        let z = 0;
        for (let j = 0; j < x.length; j++) {
          scores[j] = Math.exp(scores[j] - max);
          z += scores[j];
        }
        const out = new Array<number>(dim).fill(0);
        for (let j = 0; j < x.length; j++) {
          const w = scores[j] / z;
          for (let d = 0; d < dim; d++) out[d] += w * v[j][d];
        }
        attended.push(out);
      }
      addInPlace(x, matmul(attended, layer.wo));
      x = layerNorm(x);

      const mlp = matmul(
        matmul(x, layer.w1).map((row) => row.map(Math.tanh)),
        layer.w2,
      );
      addInPlace(x, mlp);
      x = layerNorm(x);
    }

    return { tokens: inner, vectors: x.slice(1, x.length - 1) };
  }
}
