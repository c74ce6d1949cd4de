/* tslint:disable */
/* eslint-disable */

/**
 * Relative error per iteration for the augmented and the
 * infimal-convolution solver on one random problem.
 */
export class ConvergenceTrace {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly augmented: Float64Array;
    readonly infconv: Float64Array;
}

export function convergence_demo(m: number, n: number, s: number, alpha: number, beta: number, q: number, max_iters: number, seed: bigint): ConvergenceTrace;

/**
 * `points` samples of the scalar prox on `[-u_max, u_max]`, as
 * interleaved `u, prox(u)` pairs.
 */
export function prox_curve(q: number, nu: number, mu: number, u_max: number, points: number): Float64Array;

/**
 * `[tau, lambda]`: the threshold and the smallest nonzero output.
 */
export function threshold_profile(q: number, nu: number, mu: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_convergencetrace_free: (a: number, b: number) => void;
    readonly convergence_demo: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number];
    readonly convergencetrace_augmented: (a: number) => [number, number];
    readonly convergencetrace_infconv: (a: number) => [number, number];
    readonly prox_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly threshold_profile: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
