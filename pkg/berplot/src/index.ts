export {
  EmptyInput,
  REQUIRED_COLUMNS,
  SchemaMismatch,
  parseBerCsv,
  type BerRow,
} from "./csv.js";
export {
  DEFAULT_FLOOR,
  groupRows,
  legendLabel,
  renderSvg,
  type CurveGroup,
  type RenderOptions,
} from "./figure.js";
export { main } from "./cli.js";
