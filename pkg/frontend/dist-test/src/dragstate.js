/**
 * Pointer-drag state machine for the interactive session protocol.
 *
 * Requests are serialized: while one is outstanding, pointer moves coalesce
 * into the latest position and flush as a single preview on acknowledgement.
 * Pointer-up commits once everything pending has flushed; Escape abandons
 * immediately and drops any unsent movement.
 */
export class DragController {
    constructor() {
        this.phase = "idle";
        this.inFlight = false;
        this.lastSent = { x: 0, y: 0 };
        this.pending = null;
        this.ending = null;
    }
    get active() {
        return this.phase !== "idle";
    }
    get requestInFlight() {
        return this.inFlight;
    }
    handle(input) {
        switch (input.type) {
            case "down":
                if (this.phase !== "idle")
                    return [];
                this.phase = "dragging";
                this.inFlight = true; // the begin request
                this.lastSent = { x: input.x, y: input.y };
                this.pending = null;
                this.ending = null;
                return [{ kind: "begin" }];
            case "move":
                if (this.phase !== "dragging")
                    return [];
                this.pending = { x: input.x, y: input.y };
                return this.inFlight ? [] : this.flushMove();
            case "up":
                if (this.phase !== "dragging")
                    return [];
                this.phase = "closing";
                this.ending = "commit";
                if (this.inFlight)
                    return [];
                if (this.pending)
                    return this.flushMove();
                return this.finish();
            case "escape":
                if (this.phase !== "dragging")
                    return [];
                this.phase = "closing";
                this.ending = "abandon";
                this.pending = null; // no point previewing what we are throwing away
                return this.inFlight ? [] : this.finish();
            case "ack":
                if (!this.inFlight)
                    return [];
                this.inFlight = false;
                if (this.phase === "dragging") {
                    return this.pending ? this.flushMove() : [];
                }
                if (this.phase === "closing") {
                    if (this.ending === "commit" && this.pending)
                        return this.flushMove();
                    if (this.ending)
                        return this.finish();
                    this.phase = "idle"; // final ack of commit/abandon
                }
                return [];
        }
    }
    flushMove() {
        const p = this.pending;
        const dx = p.x - this.lastSent.x;
        const dy = p.y - this.lastSent.y;
        this.pending = null;
        if (dx === 0 && dy === 0) {
            if (this.phase === "closing" && this.ending)
                return this.finish();
            return [];
        }
        this.lastSent = p;
        this.inFlight = true;
        return [{ kind: "preview", dx, dy }];
    }
    finish() {
        const ending = this.ending;
        this.ending = null;
        this.inFlight = true;
        return [{ kind: ending }];
    }
}
