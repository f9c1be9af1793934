/* tslint:disable */
/* eslint-disable */

export function apexPoints(classes: Uint8Array, width: number, height: number): Float64Array;

export function augmentMask(classes: Uint8Array, width: number, height: number, seed: bigint, full: boolean): Uint8Array;

export function distanceField(classes: Uint8Array, width: number, height: number): Uint8Array;

export function sampleMask(size: number, seed: bigint): Uint8Array;

/**
 * Palette RGBA for a class-index mask; unknown indices render magenta.
 */
export function toRgba(classes: Uint8Array): Uint8Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly apexPoints: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly augmentMask: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number, number];
    readonly distanceField: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly sampleMask: (a: number, b: bigint) => [number, number];
    readonly toRgba: (a: number, b: number) => [number, number];
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
