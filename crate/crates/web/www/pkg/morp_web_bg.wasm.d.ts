/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const apexPoints: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const augmentMask: (a: number, b: number, c: number, d: number, e: bigint, f: number) => [number, number, number, number];
export const distanceField: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const sampleMask: (a: number, b: bigint) => [number, number];
export const toRgba: (a: number, b: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
