/* tslint:disable */
/* eslint-disable */

export class CoolingCurve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly estimated: Float64Array;
    readonly exact: Float64Array;
    readonly free_decay: Float64Array;
    readonly holds: Float64Array;
    readonly kappa: number;
    readonly max_rate: number;
}

export class Profile {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly exact: number;
    readonly nbar: number;
    readonly radii: Float64Array;
    readonly values: Float64Array;
}

export class RabiTrace {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly excited: Float64Array;
    readonly expected_mhz: number;
    readonly frequency_mhz: number;
    readonly times: Float64Array;
}

export function characteristic_profile(n: number, fock: boolean, max_alpha: number, points: number): Profile;

/**
 * Thermal reset; couplings in units of the readout linewidth, times in us.
 */
export function cooling_curve(nbar: number, memory_fraction: number, readout_fraction: number, hold: number, step: number, seed: number): CoolingCurve;

/**
 * Vacuum Rabi oscillation for memory displacement `abar_m`.
 */
export function vacuum_rabi_trace(abar_m: number, points: number): RabiTrace;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_coolingcurve_free: (a: number, b: number) => void;
    readonly __wbg_profile_free: (a: number, b: number) => void;
    readonly __wbg_rabitrace_free: (a: number, b: number) => void;
    readonly characteristic_profile: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly cooling_curve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly coolingcurve_estimated: (a: number) => [number, number];
    readonly coolingcurve_exact: (a: number) => [number, number];
    readonly coolingcurve_free_decay: (a: number) => [number, number];
    readonly coolingcurve_holds: (a: number) => [number, number];
    readonly coolingcurve_kappa: (a: number) => number;
    readonly coolingcurve_max_rate: (a: number) => number;
    readonly profile_exact: (a: number) => number;
    readonly profile_nbar: (a: number) => number;
    readonly profile_radii: (a: number) => [number, number];
    readonly profile_values: (a: number) => [number, number];
    readonly rabitrace_excited: (a: number) => [number, number];
    readonly rabitrace_expected_mhz: (a: number) => number;
    readonly rabitrace_frequency_mhz: (a: number) => number;
    readonly rabitrace_times: (a: number) => [number, number];
    readonly vacuum_rabi_trace: (a: number, b: number) => [number, number, number];
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
