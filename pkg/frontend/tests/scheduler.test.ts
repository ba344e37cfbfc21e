import { describe, expect, it } from "vitest";

import { SingleFlight, Throttle } from "../src/scheduler.js";

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

describe("SingleFlight", () => {
  it("runs at most one task at a time", async () => {
    const flights = new SingleFlight();
    const order: number[] = [];
    for (let i = 0; i < 5; i++) {
      flights.submit(async () => {
        order.push(i);
        await sleep(5);
      });
    }
    await flights.idle();
    expect(flights.maxConcurrent).toBe(1);
  });

  it("coalesces to the trailing task", async () => {
    const flights = new SingleFlight();
    const ran: number[] = [];
    flights.submit(async () => {
      ran.push(0);
      await sleep(10);
    });
    // submitted while busy: only the last should run afterwards
    flights.submit(async () => {
      ran.push(1);
    });
    flights.submit(async () => {
      ran.push(2);
    });
    flights.submit(async () => {
      ran.push(3);
    });
    await flights.idle();
    expect(ran).toEqual([0, 3]);
  });

  it("keeps accepting work after a task failure", async () => {
    const errors: unknown[] = [];
    const flights = new SingleFlight((err) => errors.push(err));
    const ran: string[] = [];
    flights.submit(async () => {
      throw new Error("boom");
    });
    await flights.idle();
    flights.submit(async () => {
      ran.push("next");
    });
    await flights.idle();
    expect(ran).toEqual(["next"]);
    expect(errors).toHaveLength(1);
  });
});

describe("Throttle", () => {
  it("limits call rate and keeps the trailing call", async () => {
    const throttle = new Throttle(20);
    const calls: number[] = [];
    throttle.call(() => calls.push(1));
    throttle.call(() => calls.push(2));
    throttle.call(() => calls.push(3));
    expect(calls).toEqual([1]);
    await sleep(30);
    expect(calls).toEqual([1, 3]);
  });
});
