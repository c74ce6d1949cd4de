/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_convergencetrace_free: (a: number, b: number) => void;
export const convergence_demo: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number];
export const convergencetrace_augmented: (a: number) => [number, number];
export const convergencetrace_infconv: (a: number) => [number, number];
export const prox_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const threshold_profile: (a: number, b: number, c: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
