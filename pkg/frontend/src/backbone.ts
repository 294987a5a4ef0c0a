/**
 * Frozen feature backbones (the E_p part of the pipeline).
 *
 * The backbone is never trained here; it maps a batch of 32x32x3 images to
 * 768-dimensional embeddings. Production use loads a pretrained tfjs model
 * from disk; tests and offline development use a deterministic random-patch
 * projection that mimics a patch-embedding transformer front end.
 */

import * as tf from '@tensorflow/tfjs'

export const EMBED_DIM = 768
export const IMAGE_SIZE = 32
export const PATCH = 8 // 16 patches of 8x8x3 = 192 values each

export interface Backbone {
  readonly name: string
  /** images: [batch, 32, 32, 3] in [0, 1] -> embeddings [batch, 768]. */
  embed(images: tf.Tensor4D): tf.Tensor2D
}

/** Small deterministic PRNG so the synthetic backbone is seed-reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0
  return () => {
    a |= 0
    a = (a + 0x6d2b79f5) | 0
    let t = Math.imul(a ^ (a >>> 15), 1 | a)
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296
  }
}

function gaussianMatrix(rows: number, cols: number, rand: () => number): tf.Tensor2D {
  const data = new Float32Array(rows * cols)
  for (let i = 0; i < data.length; i += 1) {
    // Box-Muller from two uniforms.
    const u = Math.max(rand(), 1e-12)
    const v = rand()
    data[i] = Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v) / Math.sqrt(cols)
  }
  return tf.tensor2d(data, [rows, cols])
}

/**
 * Patch-projection backbone: split the image into 8x8 patches, project each
 * with a fixed Gaussian matrix, squash, and concatenate. 16 patches x 48
 * features = 768. Frozen by construction.
 */
export class SyntheticPatchBackbone implements Backbone {
  readonly name: string
  private readonly projection: tf.Tensor2D

  constructor(seed: number) {
    this.name = `synthetic-patch-${seed}`
    const perPatch = EMBED_DIM / ((IMAGE_SIZE / PATCH) * (IMAGE_SIZE / PATCH))
    this.projection = gaussianMatrix(PATCH * PATCH * 3, perPatch, mulberry32(seed + 1))
  }

  embed(images: tf.Tensor4D): tf.Tensor2D {
    return tf.tidy(() => {
      const batch = images.shape[0]
      const grid = IMAGE_SIZE / PATCH
      // [B, 32, 32, 3] -> [B, grid, PATCH, grid, PATCH, 3] -> patches
      const patches = images
        .reshape([batch, grid, PATCH, grid, PATCH, 3])
        .transpose([0, 1, 3, 2, 4, 5])
        .reshape([batch * grid * grid, PATCH * PATCH * 3])
      const projected = tf.tanh(patches.matMul(this.projection))
      return projected.reshape([batch, EMBED_DIM]) as tf.Tensor2D
    })
  }

  dispose(): void {
    this.projection.dispose()
  }
}

/** Load a pretrained tfjs model from disk and adapt it to the interface. */
export async function loadSavedBackbone(modelPath: string): Promise<Backbone> {
  const model = await tf.loadLayersModel(modelPath)
  return {
    name: modelPath,
    embed: (images: tf.Tensor4D) =>
      tf.tidy(() => {
        const out = model.predict(images) as tf.Tensor
        const flat = out.reshape([images.shape[0], -1])
        if (flat.shape[1] !== EMBED_DIM) {
          throw new Error(`backbone emits ${flat.shape[1]} features, expected ${EMBED_DIM}`)
        }
        return flat as tf.Tensor2D
      }),
  }
}

export async function resolveBackbone(modelId: string, seed: number): Promise<Backbone> {
  if (modelId === 'synthetic-patch') {
    return new SyntheticPatchBackbone(seed)
  }
  return loadSavedBackbone(modelId)
}
