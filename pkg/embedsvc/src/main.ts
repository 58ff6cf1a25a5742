/**
 * Entry point. Configuration comes from an optional JSON file
 * (EMBEDSVC_CONFIG) with environment variables taking precedence:
 *
 *   EMBEDSVC_PORT, EMBEDSVC_MODEL_NAME, EMBEDSVC_DIM, EMBEDSVC_LAYERS,
 *   EMBEDSVC_SEED, EMBEDSVC_MAX_BATCH, EMBEDSVC_MAX_TEXT_LEN,
 *   EMBEDSVC_STARTUP_DELAY_MS
 */
import fs from 'node:fs';
import { DEFAULT_CONFIG } from './encoder.js';
import { DEFAULT_SERVER_CONFIG, EmbedServer, ServerConfig } from './server.js';

function intEnv(name: string, fallback: number): number {
  const raw = process.env[name];
  if (raw === undefined || raw === '') return fallback;
  const value = Number.parseInt(raw, 10);
  if (Number.isNaN(value)) throw new Error(`${name} must be an integer, got ${raw}`);
  return value;
}

function loadFileConfig(): Partial<ServerConfig> & { port?: number } {
  const path = process.env.EMBEDSVC_CONFIG;
  if (!path) return {};
  return JSON.parse(fs.readFileSync(path, 'utf-8'));
}

const fileConfig = loadFileConfig();
const port = intEnv('EMBEDSVC_PORT', fileConfig.port ?? 8711);
const config: Partial<ServerConfig> = {
  encoder: {
    name: process.env.EMBEDSVC_MODEL_NAME ?? fileConfig.encoder?.name ?? DEFAULT_CONFIG.name,
    dim: intEnv('EMBEDSVC_DIM', fileConfig.encoder?.dim ?? DEFAULT_CONFIG.dim),
    layers: intEnv('EMBEDSVC_LAYERS', fileConfig.encoder?.layers ?? DEFAULT_CONFIG.layers),
    seed: intEnv('EMBEDSVC_SEED', fileConfig.encoder?.seed ?? DEFAULT_CONFIG.seed),
  },
  maxBatch: intEnv('EMBEDSVC_MAX_BATCH', fileConfig.maxBatch ?? DEFAULT_SERVER_CONFIG.maxBatch),
  maxTextLen: intEnv(
    'EMBEDSVC_MAX_TEXT_LEN',
    fileConfig.maxTextLen ?? DEFAULT_SERVER_CONFIG.maxTextLen,
  ),
  startupDelayMs: intEnv(
    'EMBEDSVC_STARTUP_DELAY_MS',
    fileConfig.startupDelayMs ?? DEFAULT_SERVER_CONFIG.startupDelayMs,
  ),
};

const server = new EmbedServer(config);
server
  .listen(port)
  .then((boundPort) => {
    console.log(`embedsvc listening on 127.0.0.1:${boundPort}`);
  })
  .catch((err: Error) => {
    console.error(`failed to start: ${err.message}`);
    process.exit(1);
  });
