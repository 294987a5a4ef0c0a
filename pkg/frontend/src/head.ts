/**
 * The trainable classification head M_t = M_d ∘ M_s and its truncation.
 *
 * M_s: dense 768 -> N with tanh (the retained feature layer).
 * M_d: dense N -> 2 with softmax (discarded after fine-tuning).
 * Only the head trains; backbone embeddings are computed once and frozen.
 */

import * as tf from '@tensorflow/tfjs'

import { EMBED_DIM, mulberry32 } from './backbone.js'

export interface FinetuneResult {
  /** per-epoch cross-entropy on the fine-tune split */
  losses: number[]
  /** accuracy on the fine-tune split after training */
  accuracy: number
}

export class Head {
  readonly featureDim: number
  ws: tf.Variable<tf.Rank.R2>
  bs: tf.Variable<tf.Rank.R1>
  wd: tf.Variable<tf.Rank.R2>
  bd: tf.Variable<tf.Rank.R1>

  constructor(featureDim: number, seed: number) {
    this.featureDim = featureDim
    const rand = mulberry32(seed + 101)
    const init = (rows: number, cols: number) => {
      const data = new Float32Array(rows * cols)
      const scale = 1 / Math.sqrt(rows)
      for (let i = 0; i < data.length; i += 1) data[i] = (rand() * 2 - 1) * scale
      return tf.tensor2d(data, [rows, cols])
    }
    this.ws = tf.variable(init(EMBED_DIM, featureDim)) as tf.Variable<tf.Rank.R2>
    this.bs = tf.variable(tf.zeros([featureDim])) as tf.Variable<tf.Rank.R1>
    this.wd = tf.variable(init(featureDim, 2)) as tf.Variable<tf.Rank.R2>
    this.bd = tf.variable(tf.zeros([2])) as tf.Variable<tf.Rank.R1>
  }

  /** The retained part M_s: embeddings -> N features. */
  features(embeddings: tf.Tensor2D): tf.Tensor2D {
    return tf.tidy(() => tf.tanh(embeddings.matMul(this.ws).add(this.bs)) as tf.Tensor2D)
  }

  logits(embeddings: tf.Tensor2D): tf.Tensor2D {
    return tf.tidy(() => this.features(embeddings).matMul(this.wd).add(this.bd) as tf.Tensor2D)
  }

  accuracy(embeddings: tf.Tensor2D, labels: Uint8Array): number {
    return tf.tidy(() => {
      const predicted = this.logits(embeddings).argMax(1).dataSync()
      let hit = 0
      for (let i = 0; i < labels.length; i += 1) if (predicted[i] === labels[i]) hit += 1
      return hit / labels.length
    })
  }

  /**
   * Deterministic mini-batch gradient descent on softmax cross-entropy.
   * Batches follow a seeded shuffle per epoch; the backbone stays frozen
   * because only head variables are updated.
   */
  finetune(
    embeddings: tf.Tensor2D,
    labels: Uint8Array,
    epochs: number,
    batchSize: number,
    learningRate: number,
    seed: number,
  ): FinetuneResult {
    const n = labels.length
    const optimizer = tf.train.sgd(learningRate)
    const oneHot = tf.oneHot(tf.tensor1d(Array.from(labels), 'int32'), 2)
    const rand = mulberry32(seed + 977)
    const losses: number[] = []
    const vars = [this.ws, this.bs, this.wd, this.bd]
    for (let epoch = 0; epoch < epochs; epoch += 1) {
      const order = Array.from({ length: n }, (_, i) => i)
      for (let i = n - 1; i > 0; i -= 1) {
        const j = Math.floor(rand() * (i + 1))
        ;[order[i], order[j]] = [order[j], order[i]]
      }
      let epochLoss = 0
      for (let lo = 0; lo < n; lo += batchSize) {
        const idx = tf.tensor1d(order.slice(lo, lo + batchSize), 'int32')
        const x = tf.gather(embeddings, idx) as tf.Tensor2D
        const y = tf.gather(oneHot, idx) as tf.Tensor2D
        const lossVal = optimizer.minimize(
          () => tf.losses.softmaxCrossEntropy(y, this.logits(x)) as tf.Scalar,
          true,
          vars,
        )
        epochLoss += (lossVal!.dataSync()[0] as number) * idx.shape[0]
        lossVal!.dispose()
        idx.dispose()
        x.dispose()
        y.dispose()
      }
      losses.push(epochLoss / n)
    }
    oneHot.dispose()
    return { losses, accuracy: this.accuracy(embeddings, labels) }
  }

  dispose(): void {
    this.ws.dispose()
    this.bs.dispose()
    this.wd.dispose()
    this.bd.dispose()
  }
}
