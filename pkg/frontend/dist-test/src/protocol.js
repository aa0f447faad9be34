/**
 * Service protocol types and the pure pixel-patching logic.
 *
 * The client never renders anything itself: every displayed pixel arrives in
 * a patch (a PNG crop over the damage bounding box) and is copied onto the
 * frame buffer only where the damage span list says so.
 */
/** Parse the span debug format: one `y: s-e, s-e, ...` line per scanline. */
export function parseSpans(text) {
    const spans = [];
    if (!text)
        return spans;
    for (const rawLine of text.split("\n")) {
        const line = rawLine.trim();
        if (!line)
            continue;
        const colon = line.indexOf(":");
        if (colon < 0)
            throw new Error(`bad span line: ${line}`);
        const y = parseInt(line.slice(0, colon), 10);
        if (Number.isNaN(y))
            throw new Error(`bad scanline y in: ${line}`);
        for (const item of line.slice(colon + 1).split(",")) {
            const m = item.trim().match(/^(-?\d+)-(-?\d+)$/);
            if (!m)
                throw new Error(`bad span ${item.trim()} in: ${line}`);
            spans.push({ y, x0: parseInt(m[1], 10), x1: parseInt(m[2], 10) });
        }
    }
    return spans;
}
export function spanArea(spans) {
    return spans.reduce((acc, s) => acc + (s.x1 - s.x0 + 1), 0);
}
export function spanBounds(spans) {
    if (spans.length === 0)
        return null;
    let x0 = Infinity, y0 = Infinity, x1 = -Infinity, y1 = -Infinity;
    for (const s of spans) {
        x0 = Math.min(x0, s.x0);
        x1 = Math.max(x1, s.x1);
        y0 = Math.min(y0, s.y);
        y1 = Math.max(y1, s.y);
    }
    return [x0, y0, x1, y1];
}
/** RGBA frame buffer the patches are applied to. */
export class FrameBuffer {
    constructor(width, height, data) {
        this.width = width;
        this.height = height;
        this.data = data ?? new Uint8ClampedArray(width * height * 4);
        if (this.data.length !== width * height * 4) {
            throw new Error("frame data size does not match dimensions");
        }
    }
    clone() {
        return new FrameBuffer(this.width, this.height, this.data.slice());
    }
    equals(other) {
        if (other.width !== this.width || other.height !== this.height)
            return false;
        for (let i = 0; i < this.data.length; i++) {
            if (this.data[i] !== other.data[i])
                return false;
        }
        return true;
    }
    /**
     * Copy the span pixels out of a patch crop. `crop` holds RGBA rows for the
     * inclusive box [bx0..bx1] x [by0..by1]; pixels outside the spans stay
     * untouched, pixels outside the frame are clipped.
     */
    applyPatch(spans, bbox, crop) {
        const [bx0, by0, bx1, by1] = bbox;
        const cw = bx1 - bx0 + 1;
        const ch = by1 - by0 + 1;
        if (crop.length !== cw * ch * 4) {
            throw new Error("crop size does not match bbox");
        }
        for (const s of spans) {
            if (s.y < by0 || s.y > by1 || s.y < 0 || s.y >= this.height)
                continue;
            const x0 = Math.max(s.x0, bx0, 0);
            const x1 = Math.min(s.x1, bx1, this.width - 1);
            if (x0 > x1)
                continue;
            const srcOff = ((s.y - by0) * cw + (x0 - bx0)) * 4;
            const dstOff = (s.y * this.width + x0) * 4;
            this.data.set(crop.subarray(srcOff, srcOff + (x1 - x0 + 1) * 4), dstOff);
        }
    }
}
