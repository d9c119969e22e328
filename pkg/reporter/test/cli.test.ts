import { describe, expect, it } from "vitest";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { parseArgs, runCli } from "../src/cli.js";

const FIXTURE = join(dirname(fileURLToPath(import.meta.url)), "fixtures", "short.csv");

describe("argument parsing", () => {
  it("applies defaults", () => {
    const opts = parseArgs(["log.csv"]);
    expect(opts.outDir).toBe(".");
    expect(opts.panels).toEqual(["errors", "param_norms"]);
  });

  it("parses panels and out dir", () => {
    const opts = parseArgs(["log.csv", "--out", "figs", "--panels",
      "errors,workspace_xy"]);
    expect(opts.outDir).toBe("figs");
    expect(opts.panels).toEqual(["errors", "workspace_xy"]);
  });

  it("requires the csv path", () => {
    expect(() => parseArgs([])).toThrow(/CSV_PATH/);
  });

  it("rejects unknown options", () => {
    expect(() => parseArgs(["log.csv", "--bogus"])).toThrow(/unknown option/);
  });
});

describe("end to end", () => {
  it("renders all panels from the fixture", () => {
    const out = mkdtempSync(join(tmpdir(), "reporter-"));
    const lines: string[] = [];
    const code = runCli([FIXTURE, "--out", out, "--panels",
      "errors,param_norms,constraint_bands,workspace_xy"],
      (s) => lines.push(s));
    expect(code).toBe(0);
    for (const name of ["errors", "param_norms", "constraint_bands",
      "workspace_xy"]) {
      expect(existsSync(join(out, `${name}.svg`))).toBe(true);
      expect(readFileSync(join(out, `${name}.svg`), "utf-8")).toContain("</svg>");
    }
    expect(lines).toContain("out_of_band_samples=0");
  });

  it("schema failures exit with code 2", () => {
    const dir = mkdtempSync(join(tmpdir(), "reporter-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "t,x\n0,1\n");
    expect(runCli([bad, "--out", dir], () => undefined)).toBe(2);
  });

  it("missing file exits with code 1", () => {
    expect(runCli(["/does/not/exist.csv"], () => undefined)).toBe(1);
  });

  it("missing columns for a panel exit with code 2 naming the column", () => {
    const dir = mkdtempSync(join(tmpdir(), "reporter-"));
    const partial = join(dir, "partial.csv");
    writeFileSync(partial, "t,norm_e_p # sync-sim-log-v1\n0,0.1\n");
    expect(runCli([partial, "--out", dir, "--panels", "errors"],
      () => undefined)).toBe(2);
  });
});
