/**
 * Wire protocol: one JSON object per line over stdio.
 *
 * handshake:  {"protocol": "merge-bbo/1", "space": {"n_models", "n_layers"} | null}
 * request:    {"id": k, "z": [0|1, ...], "x": [number, ...], "meta": {...}?}
 * response:   {"id": k, "objective": v, "score"?: s, "aux"?: {...}}
 *             or {"id": k, "error": "..."}
 *
 * Responses are emitted strictly in request order. A line that does not
 * parse as JSON is answered with {"id": -1, "error": "parse"}; a parsed
 * object with invalid fields is answered with an error echoing its id when
 * one is present. Serving continues after errors; the process exits 0 when
 * stdin closes.
 */

import * as readline from "readline";

export const PROTOCOL_NAME = "merge-bbo/1";

export interface SpaceShape {
  n_models: number;
  n_layers: number;
}

export interface EvalRequest {
  id: number;
  z: number[];
  x: number[];
meta?: { space?: SpaceShape; objective_id?: string };
}

export interface EvalSuccess {
  id: number;
  objective: number;
  score?: number;
  aux?: Record<string, number>;
}

export interface EvalError {
  id: number;
  error: string;
}

export type EvalResponse = EvalSuccess | EvalError;

export type ObjectiveFn = (z: number[], x: number[]) => EvalSuccess | Omit<EvalSuccess, "id">;

export function handshakeLine(space: SpaceShape | null): string {
  return JSON.stringify({ protocol: PROTOCOL_NAME, space });
}

export class RequestError extends Error {
  readonly requestId: number;

  constructor(message: string, requestId: number) {
    super(message);
    this.requestId = requestId;
  }
}

/** Validate a parsed line into a request; throws RequestError with the
 * offending id (-1 when none is recoverable). */
export function validateRequest(value: unknown): EvalRequest {
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new RequestError("request must be a JSON object", -1);
  }
  const obj = value as Record<string, unknown>;
  const rawId = obj["id"];
  const id = typeof rawId === "number" && Number.isInteger(rawId) ? rawId : -1;
  if (id === -1) {
    throw new RequestError("missing integer id", -1);
  }
  const z = obj["z"];
  const x = obj["x"];
  if (!Array.isArray(z) || !z.every((b) => b === 0 || b === 1)) {
    throw new RequestError("z must be an array of 0/1", id);
  }
  if (!Array.isArray(x) || !x.every((v) => typeof v === "number" && Number.isFinite(v))) {
    throw new RequestError("x must be an array of finite numbers", id);
  }
  if (z.length !== x.length) {
    throw new RequestError(`z length ${z.length} != x length ${x.length}`, id);
  }
  return { id, z: z as number[], x: x as number[], meta: obj["meta"] as EvalRequest["meta"] };
}

export function respondTo(line: string, objective: ObjectiveFn): EvalResponse {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch {
    return { id: -1, error: "parse" };
  }
  let request: EvalRequest;
  try {
    request = validateRequest(parsed);
  } catch (err) {
    if (err instanceof RequestError) {
      return { id: err.requestId, error: err.message };
    }
    return { id: -1, error: String(err) };
  }
  try {
    const result = objective(request.z, request.x);
    return { ...result, id: request.id };
  } catch (err) {
    return { id: request.id, error: err instanceof Error ? err.message : String(err) };
  }
}

/** Serve requests line by line; resolves when the input stream ends. */
export function serve(
  input: NodeJS.ReadableStream,
  output: NodeJS.WritableStream,
  objective: ObjectiveFn,
  space: SpaceShape | null
): Promise<void> {
  output.write(handshakeLine(space) + "\n");
  const rl = readline.createInterface({ input, crlfDelay: Infinity });
  return new Promise((resolve) => {
    rl.on("line", (line) => {
      if (line.trim().length === 0) {
        return;
      }
      output.write(JSON.stringify(respondTo(line, objective)) + "\n");
    });
    rl.on("close", () => resolve());
  });
}
