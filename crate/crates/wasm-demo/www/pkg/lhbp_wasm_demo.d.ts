/* tslint:disable */
/* eslint-disable */

/**
 * Fixed-point curve of the example2 family through the anchor
 * `q_0 + t (q~_0 - q_0)` together with the `q` and `q~` windows.
 */
export function fixed_point_curve(gamma: number, t: number, window: number): string;

/**
 * `q_0^(k)`, `q~_0^(k)` and the regime for `gamma = 0, 1/n, ..., (n-1)/n`.
 */
export function gamma_sweep(points: number, k: number): string;

/**
 * Embedded moment table `mu_k`, `a_k`, `x_k`, `m_{0->k}` up to `horizon`.
 */
export function moments_table(family: string, params: Float64Array, horizon: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly fixed_point_curve: (a: number, b: number, c: number) => [number, number];
    readonly gamma_sweep: (a: number, b: number) => [number, number];
    readonly moments_table: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
