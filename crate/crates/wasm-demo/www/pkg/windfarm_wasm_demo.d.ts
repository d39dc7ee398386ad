/* tslint:disable */
/* eslint-disable */

export class FarmDemo {
    free(): void;
    [Symbol.dispose](): void;
    contributions(): Float64Array;
    cumulative_reward(): number;
    /**
     * Flat `[sender, receiver, ...]` pairs of the neighbour graph.
     */
    edges(): Uint32Array;
    efficiency(): number;
    /**
     * Local wind angles on a `resolution × resolution` grid, row-major
     * from the top-left corner.
     */
    field(resolution: number): Float64Array;
    local_winds(): Float64Array;
    main_wind_angle(): number;
    constructor(turbines: number, random_layout: boolean, neighbours: number, seed: bigint, noise_amplitude: number, noise_scale: number);
    orientations(): Float64Array;
    /**
     * Pooled neighbourhood wind per turbine, `[x0, y0, ...]`, as if every
     * turbine had broadcast its current local wind.
     */
    pooled(): Float64Array;
    /**
     * Flat `[x0, y0, x1, y1, ...]` in the unit farm square.
     */
    positions(): Float64Array;
    release_wind(): void;
    set_wind_direction(degrees: number): void;
    /**
     * Advances `n` steps; episodes restart automatically.
     */
    step(n: number): void;
    step_index(): bigint;
}

/**
 * Energy contribution of a turbine facing `orientation_deg` in wind
 * blowing toward `wind_deg`.
 */
export function contribution(wind_deg: number, orientation_deg: number): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_farmdemo_free: (a: number, b: number) => void;
    readonly contribution: (a: number, b: number) => number;
    readonly farmdemo_contributions: (a: number) => [number, number];
    readonly farmdemo_cumulative_reward: (a: number) => number;
    readonly farmdemo_edges: (a: number) => [number, number];
    readonly farmdemo_efficiency: (a: number) => number;
    readonly farmdemo_field: (a: number, b: number) => [number, number];
    readonly farmdemo_local_winds: (a: number) => [number, number];
    readonly farmdemo_main_wind_angle: (a: number) => number;
    readonly farmdemo_new: (a: number, b: number, c: number, d: bigint, e: number, f: number) => [number, number, number];
    readonly farmdemo_orientations: (a: number) => [number, number];
    readonly farmdemo_pooled: (a: number) => [number, number];
    readonly farmdemo_positions: (a: number) => [number, number];
    readonly farmdemo_release_wind: (a: number) => void;
    readonly farmdemo_set_wind_direction: (a: number, b: number) => void;
    readonly farmdemo_step: (a: number, b: number) => [number, number];
    readonly farmdemo_step_index: (a: number) => bigint;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
