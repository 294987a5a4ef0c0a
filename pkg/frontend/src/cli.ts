/**
 * CLI: `node dist/cli.js export --config config.json --out features.csv`
 *
 * `finetune` runs the head training alone and reports metrics; `export`
 * runs fine-tune + truncation + feature export in one pass.
 */

import { DEFAULT_CONFIG, loadConfig } from './config.js'
import { runExport } from './export.js'

function parseArgs(argv: string[]): { command: string; flags: Map<string, string> } {
  const [command, ...rest] = argv
  const flags = new Map<string, string>()
  for (let i = 0; i < rest.length; i += 2) {
    const key = rest[i]
    if (!key.startsWith('--') || i + 1 >= rest.length) {
      throw new Error(`malformed flag near ${key}`)
    }
    flags.set(key.slice(2), rest[i + 1])
  }
  return { command, flags }
}

async function main(): Promise<number> {
  const { command, flags } = parseArgs(process.argv.slice(2))
  if (!['finetune', 'export'].includes(command)) {
    console.error('usage: cli.js <finetune|export> [--config file.json] [--out features.csv]')
    return 2
  }
  const config = flags.has('config') ? loadConfig(flags.get('config')!) : { ...DEFAULT_CONFIG }
  if (flags.has('data-dir')) config.dataDir = flags.get('data-dir')
  if (flags.has('seed')) config.seed = Number(flags.get('seed'))
  const out = flags.get('out') ?? 'features.csv'

  const outcome = await runExport(config, out)
  if (command === 'finetune') {
    console.log(
      `finetune: ${outcome.finetune.losses.length} epochs, ` +
        `final loss ${outcome.finetune.losses.at(-1)?.toFixed(4)}, ` +
        `split accuracy ${outcome.finetune.accuracy.toFixed(4)}`,
    )
  } else {
    console.log(
      `export: ${outcome.nExported} records x ${outcome.featureDim} features -> ${outcome.csvPath} ` +
        `(sha256 ${outcome.checksum.slice(0, 12)}...)`,
    )
  }
  return 0
}

main()
  .then((code) => process.exit(code))
  .catch((err) => {
    console.error(`error: ${err.message}`)
    process.exit(1)
  })
