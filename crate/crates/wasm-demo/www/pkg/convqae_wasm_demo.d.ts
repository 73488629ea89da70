/* tslint:disable */
/* eslint-disable */

/**
 * Flip `round(rate · width · height)` distinct pixels.
 */
export function add_noise(pixels: Uint8Array, width: number, height: number, rate: number, seed: number): Uint8Array;

/**
 * Learn one 3×3 filter per pixel of `clean` and denoise `noisy` with them.
 */
export function denoise_conv(clean: Uint8Array, noisy: Uint8Array, width: number, height: number, seed: number): Uint8Array;

/**
 * Learn whole-image couplings on `clean` (at least 3×3) and denoise `noisy`.
 */
export function denoise_whole(clean: Uint8Array, noisy: Uint8Array, width: number, height: number, seed: number): Uint8Array;

/**
 * `[f_right, f_down]`: sums of right- and down-neighbour couplings.
 */
export function features(pixels: Uint8Array, width: number, height: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly add_noise: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly denoise_conv: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly denoise_whole: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly features: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
