import { test } from "node:test";
import assert from "node:assert/strict";

import { parseCsv, requireColumns } from "../src/csv";

test("parses header and rows", () => {
  const table = parseCsv("a,b\n1,2\n3,4\n");
  assert.deepEqual(table.header, ["a", "b"]);
  assert.equal(table.rows.length, 2);
  assert.equal(table.rows[1].b, "4");
});

test("rejects empty input and header-only input", () => {
  assert.throws(() => parseCsv(""), /empty CSV/);
  assert.throws(() => parseCsv("a,b\n"), /no data rows/);
});

test("rejects ragged rows", () => {
  assert.throws(() => parseCsv("a,b\n1,2,3\n"), /row 2/);
});

test("requireColumns names every missing column", () => {
  const table = parseCsv("a,b\n1,2\n");
  requireColumns(table, ["a"]);
  assert.throws(() => requireColumns(table, ["a", "x", "y"]), /x, y/);
});
