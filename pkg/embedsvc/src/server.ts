/**
 * Wire protocol around the encoder: POST /embed and GET /health.
 *
 * Responses are 503 until the encoder finishes loading. Oversize texts are
 * rejected per item (the batch still succeeds); empty texts make the whole
 * request malformed (400 with per-item diagnostics); batches over the cap
 * get 413.
 */
import http from 'node:http';
import { Encoder, EncoderConfig, DEFAULT_CONFIG } from './encoder.js';

export interface ServerConfig {
  encoder: EncoderConfig;
  maxBatch: number;
  maxTextLen: number;
  startupDelayMs: number;
}

export const DEFAULT_SERVER_CONFIG: ServerConfig = {
  encoder: DEFAULT_CONFIG,
  maxBatch: 64,
  maxTextLen: 2000,
  startupDelayMs: 0,
};

interface EmbedItem {
  tokens?: string[];
  vectors?: number[][];
  error?: string;
}

function sendJson(res: http.ServerResponse, status: number, payload: unknown): void {
  const body = JSON.stringify(payload);
  res.writeHead(status, {
    'Content-Type': 'application/json',
    'Content-Length': Buffer.byteLength(body),
  });
  res.end(body);
}

function readBody(req: http.IncomingMessage, limit: number): Promise<string> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    let size = 0;
    req.on('data', (chunk: Buffer) => {
      size += chunk.length;
      if (size > limit) {
        reject(new Error('body too large'));
        req.destroy();
        return;
      }
      chunks.push(chunk);
    });
    req.on('end', () => resolve(Buffer.concat(chunks).toString('utf-8')));
    req.on('error', reject);
  });
}

export class EmbedServer {
  private readonly config: ServerConfig;
  private readonly server: http.Server;
  private encoder: Encoder | null = null;

  constructor(config: Partial<ServerConfig> = {}) {
    this.config = {
      ...DEFAULT_SERVER_CONFIG,
      ...config,
      encoder: { ...DEFAULT_CONFIG, ...(config.encoder ?? {}) },
    };
    this.server = http.createServer((req, res) => {
      this.handle(req, res).catch((err: Error) => {
        sendJson(res, 500, { error: err.message });
      });
    });
  }

  /** Start listening immediately; the model loads afterwards. */
  listen(port: number, host = '127.0.0.1'): Promise<number> {
    return new Promise((resolve, reject) => {
      this.server.once('error', reject);
      this.server.listen(port, host, () => {
        const address = this.server.address();
        if (address === null || typeof address === 'string') {
          reject(new Error('could not determine bound port'));
          return;
        }
        setTimeout(() => {
          this.encoder = new Encoder(this.config.encoder);
          // warm the weight path so the first request costs the same as any other
          this.encoder.encode('warmup sentence');
        }, this.config.startupDelayMs);
        resolve(address.port);
      });
    });
  }

  close(): Promise<void> {
    return new Promise((resolve, reject) =>
      this.server.close((err) => (err ? reject(err) : resolve())),
    );
  }

  private async handle(req: http.IncomingMessage, res: http.ServerResponse): Promise<void> {
    if (req.method === 'GET' && req.url === '/health') {
      if (this.encoder === null) {
        sendJson(res, 503, { status: 'loading' });
        return;
      }
      sendJson(res, 200, {
        status: 'ok',
        model: this.encoder.identity,
        dim: this.encoder.config.dim,
      });
      return;
    }
    if (req.method === 'POST' && req.url === '/embed') {
      if (this.encoder === null) {
        sendJson(res, 503, { status: 'loading' });
        return;
      }
      await this.handleEmbed(req, res, this.encoder);
      return;
    }
    sendJson(res, 404, { error: `no route for ${req.method} ${req.url}` });
  }

  private async handleEmbed(
    req: http.IncomingMessage,
    res: http.ServerResponse,
    encoder: Encoder,
  ): Promise<void> {
    let parsed: unknown;
    try {
      parsed = JSON.parse(await readBody(req, 8 * 1024 * 1024));
    } catch (err) {
      sendJson(res, 400, { error: `invalid JSON body: ${(err as Error).message}` });
      return;
    }
    const body = parsed as { texts?: unknown; model?: unknown };
    if (!Array.isArray(body.texts) || body.texts.length === 0) {
      sendJson(res, 400, { error: 'texts must be a non-empty array of strings' });
      return;
    }
    if (body.texts.length > this.config.maxBatch) {
      sendJson(res, 413, {
        error: `batch of ${body.texts.length} exceeds maximum ${this.config.maxBatch}`,
      });
      return;
    }
    if (body.model !== undefined && body.model !== encoder.identity) {
      sendJson(res, 400, {
        error: `model hint ${String(body.model)} does not match loaded ${encoder.identity}`,
      });
      return;
    }

    const diagnostics: (string | null)[] = body.texts.map((text) => {
      if (typeof text !== 'string' || text.trim().length === 0) return 'empty text';
      return null;
    });
    if (diagnostics.some((d) => d === 'empty text')) {
      sendJson(res, 400, {
        error: 'batch contains empty texts',
        results: diagnostics.map((d) => (d ? { error: d } : {})),
      });
      return;
    }

    const results: EmbedItem[] = (body.texts as string[]).map((text) => {
      if (text.length > this.config.maxTextLen) {
        return { error: `text of ${text.length} chars exceeds maximum ${this.config.maxTextLen}` };
      }
      const { tokens, vectors } = encoder.encode(text);
      return { tokens, vectors };
    });
    sendJson(res, 200, {
      model: encoder.identity,
      dim: encoder.config.dim,
      results,
    });
  }
}
