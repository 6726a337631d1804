/* tslint:disable */
/* eslint-disable */

/**
 * Kappa and leakage rates of a 2x2 confusion matrix (rows are the true class),
 * compared with the limit for `cdr` bits when `cdr` is positive.
 */
export function confusion_rates(n1_true: number, n1_leak: number, n2_leak: number, n2_true: number, cdr: number): string;

/**
 * Renyi and Chernoff profile of a reference model.
 *
 * `family` is `"gaussian"` (`p1..p4` = mean1, sd1, mean2, sd2) or
 * `"exponential"` (`p1`, `p2` = the two rates).
 */
export function divergence_curve(family: string, p1: number, p2: number, p3: number, p4: number, dim: number, points: number): string;

/**
 * Predicted kappa against f1 from the two leakage lines, with the balance point.
 */
export function kappa_curve(delta1: number, d21: number, delta2: number, d12: number, points: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly confusion_rates: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly divergence_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly kappa_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number];
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
