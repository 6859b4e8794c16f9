import { describe, expect, it } from "vitest";
import { PARAM_FIELDS, serverBases, topCandidates } from "../src/app.js";

describe("topCandidates", () => {
  it("caps the card list at three, order preserved", () => {
    expect(topCandidates([])).toEqual([]);
    expect(topCandidates(["a", "b"])).toEqual(["a", "b"]);
    expect(topCandidates(["a", "b", "c", "d", "e"])).toEqual(["a", "b", "c"]);
  });
});

describe("serverBases", () => {
  it("defaults to the local service port", () => {
    expect(serverBases("")).toEqual({
      http: "http://127.0.0.1:8787",
      ws: "ws://127.0.0.1:8787/ws",
    });
  });

  it("honors ?server=host:port", () => {
    expect(serverBases("?server=localhost:9001")).toEqual({
      http: "http://localhost:9001",
      ws: "ws://localhost:9001/ws",
    });
  });

  it("strips schemes and trailing slashes from the override", () => {
    expect(serverBases("server=http://10.0.0.5:8000/")).toEqual({
      http: "http://10.0.0.5:8000",
      ws: "ws://10.0.0.5:8000/ws",
    });
  });
});

describe("parameter panel fields", () => {
  it("are unique and sized", () => {
    const names = PARAM_FIELDS.map((f) => f.name);
    expect(new Set(names).size).toBe(names.length);
    for (const field of PARAM_FIELDS) {
      expect(field.name.length).toBeGreaterThan(0);
      expect(field.step).toBeGreaterThan(0);
    }
  });
});
