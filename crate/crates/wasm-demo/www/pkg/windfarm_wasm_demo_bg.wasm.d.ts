/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_farmdemo_free: (a: number, b: number) => void;
export const contribution: (a: number, b: number) => number;
export const farmdemo_contributions: (a: number) => [number, number];
export const farmdemo_cumulative_reward: (a: number) => number;
export const farmdemo_edges: (a: number) => [number, number];
export const farmdemo_efficiency: (a: number) => number;
export const farmdemo_field: (a: number, b: number) => [number, number];
export const farmdemo_local_winds: (a: number) => [number, number];
export const farmdemo_main_wind_angle: (a: number) => number;
export const farmdemo_new: (a: number, b: number, c: number, d: bigint, e: number, f: number) => [number, number, number];
export const farmdemo_orientations: (a: number) => [number, number];
export const farmdemo_pooled: (a: number) => [number, number];
export const farmdemo_positions: (a: number) => [number, number];
export const farmdemo_release_wind: (a: number) => void;
export const farmdemo_set_wind_direction: (a: number, b: number) => void;
export const farmdemo_step: (a: number, b: number) => [number, number];
export const farmdemo_step_index: (a: number) => bigint;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
