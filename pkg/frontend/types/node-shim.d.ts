// Minimal ambient declarations for node:test / node:assert, so the test
// build needs no installed @types packages.
declare module "node:test" {
  type TestFn = () => void | Promise<void>;
  export function test(name: string, fn: TestFn): void;
  export function describe(name: string, fn: () => void): void;
  export function it(name: string, fn: TestFn): void;
}
declare module "node:assert/strict" {
  function strictEqual(a: unknown, b: unknown, msg?: string): void;
  function deepStrictEqual(a: unknown, b: unknown, msg?: string): void;
  function ok(v: unknown, msg?: string): void;
  function throws(fn: () => void, msg?: string): void;
  export { strictEqual, deepStrictEqual, ok, throws };
  const assert: {
    strictEqual: typeof strictEqual;
    deepStrictEqual: typeof deepStrictEqual;
    ok: typeof ok;
    throws: typeof throws;
  };
  export default assert;
}
