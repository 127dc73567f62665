/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_coolingcurve_free: (a: number, b: number) => void;
export const __wbg_profile_free: (a: number, b: number) => void;
export const __wbg_rabitrace_free: (a: number, b: number) => void;
export const characteristic_profile: (a: number, b: number, c: number, d: number) => [number, number, number];
export const cooling_curve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const coolingcurve_estimated: (a: number) => [number, number];
export const coolingcurve_exact: (a: number) => [number, number];
export const coolingcurve_free_decay: (a: number) => [number, number];
export const coolingcurve_holds: (a: number) => [number, number];
export const coolingcurve_kappa: (a: number) => number;
export const coolingcurve_max_rate: (a: number) => number;
export const profile_exact: (a: number) => number;
export const profile_nbar: (a: number) => number;
export const profile_radii: (a: number) => [number, number];
export const profile_values: (a: number) => [number, number];
export const rabitrace_excited: (a: number) => [number, number];
export const rabitrace_expected_mhz: (a: number) => number;
export const rabitrace_frequency_mhz: (a: number) => number;
export const rabitrace_times: (a: number) => [number, number];
export const vacuum_rabi_trace: (a: number, b: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
