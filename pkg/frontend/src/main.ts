import { ApiClient, ServiceError } from "./api";
import { formatDelta, formatEuro, presentResult } from "./format";
import {
  FormState,
  applyServiceError,
  buildFormState,
  isSubmittable,
  options,
  setField,
  toRequest,
} from "./form";
import type { FieldName, PredictionResponse } from "./types";
import { BOOLEAN_FIELDS, CATEGORICAL_FIELDS, NUMERIC_FIELDS } from "./types";
import { Scenario, compareScenarios, promoteVariant } from "./whatif";

const FIELD_LABELS: Record<FieldName, string> = {
  vehicleType: "Vehicle type",
  model: "Model",
  fuelType: "Fuel type",
  brand: "Brand",
  age: "Age (years)",
  powerPS: "Power (PS)",
  kilometer: "Kilometers",
  damageRepaired: "Damage repaired",
  isAutomatic: "Automatic gearbox",
};

type PanelName = "base" | "variant";

class PricingConsole {
  private base: FormState | null = null;
  private variant: FormState | null = null;
  private baseScenario: Scenario | null = null;
  private variantScenario: Scenario | null = null;
  private inFlight: Record<PanelName, boolean> = { base: false, variant: false };

  constructor(
    private readonly client: ApiClient,
    private readonly root: Document,
  ) {}

  async start(): Promise<void> {
    try {
      const metadata = await this.client.metadata();
      this.base = buildFormState(metadata);
      if (this.base.disabledReason) this.banner(this.base.disabledReason);
      this.el("model-version").textContent = `model ${metadata.modelVersion}`;
    } catch (err) {
      this.banner(this.describe(err), true);
    }
    this.render();
  }

  private el(id: string): HTMLElement {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node;
  }

  private banner(message: string, retry = false): void {
    const node = this.el("banner");
    node.textContent = message;
    node.classList.remove("hidden");
    if (retry) {
      const button = this.root.createElement("button");
      button.textContent = "retry";
      button.onclick = () => {
        node.classList.add("hidden");
        void this.start();
      };
      node.append(" ", button);
    }
  }

  private describe(err: unknown): string {
    if (err instanceof ServiceError) return err.detail.message;
    return "cannot reach the prediction service";
  }

  private state(panel: PanelName): FormState | null {
    return panel === "base" ? this.base : this.variant;
  }

  private setState(panel: PanelName, state: FormState): void {
    if (panel === "base") this.base = state;
    else this.variant = state;
  }

  private renderForm(panel: PanelName, container: HTMLElement): void {
    const state = this.state(panel);
    container.textContent = "";
    if (!state) return;
    for (const field of [...CATEGORICAL_FIELDS, ...NUMERIC_FIELDS, ...BOOLEAN_FIELDS]) {
      const row = this.root.createElement("label");
      row.className = "field";
      const caption = this.root.createElement("span");
      caption.textContent = FIELD_LABELS[field];
      row.append(caption);

      let input: HTMLElement;
      if ((CATEGORICAL_FIELDS as readonly string[]).includes(field)) {
        const select = this.root.createElement("select");
        for (const value of options(state, field as (typeof CATEGORICAL_FIELDS)[number])) {
          const opt = this.root.createElement("option");
          opt.value = value;
          opt.textContent = value;
          opt.selected = value === state.fields[field].value;
          select.append(opt);
        }
        select.onchange = () => this.edit(panel, field, select.value);
        input = select;
      } else if ((NUMERIC_FIELDS as readonly string[]).includes(field)) {
        const box = this.root.createElement("input");
        box.type = "number";
        box.value = state.fields[field].value;
        const bounds = state.metadata.bounds[field];
        if (bounds?.min !== null && bounds?.min !== undefined) box.min = String(bounds.min);
        if (bounds?.max !== null && bounds?.max !== undefined) box.max = String(bounds.max);
        box.oninput = () => this.edit(panel, field, box.value);
        input = box;
      } else {
        const check = this.root.createElement("input");
        check.type = "checkbox";
        check.checked = state.fields[field].value === "true";
        check.onchange = () => this.edit(panel, field, check.checked ? "true" : "false");
        input = check;
      }
      row.append(input);
      const error = this.root.createElement("span");
      error.className = "error";
      error.textContent = state.fields[field].error ?? "";
      row.append(error);
      container.append(row);
    }
  }

  private edit(panel: PanelName, field: FieldName, raw: string): void {
    const state = this.state(panel);
    if (!state) return;
    this.setState(panel, setField(state, field, raw));
    this.render();
  }

  private async submit(panel: PanelName): Promise<void> {
    const state = this.state(panel);
    if (!state || !isSubmittable(state) || this.inFlight[panel]) return;
    this.inFlight[panel] = true;
    this.render();
    try {
      const request = toRequest(state);
      const response: PredictionResponse = await this.client.predict(request);
      const scenario = { request, response };
      if (panel === "base") this.baseScenario = scenario;
      else this.variantScenario = scenario;
    } catch (err) {
      if (err instanceof ServiceError && err.detail.field) {
        this.setState(panel, applyServiceError(state, err.detail));
      } else {
        this.banner(this.describe(err), true);
      }
    } finally {
      this.inFlight[panel] = false;
      this.render();
    }
  }

  private openVariant(): void {
    if (!this.base) return;
    this.variant = { ...this.base, fields: { ...this.base.fields } };
    this.variantScenario = null;
    this.render();
  }

  private promote(): void {
    if (!this.baseScenario || !this.variantScenario || !this.variant) return;
    const pair = compareScenarios(this.baseScenario, this.variantScenario);
    this.baseScenario = promoteVariant(pair);
    this.base = this.variant;
    this.variant = null;
    this.variantScenario = null;
    this.render();
  }

  private renderResult(container: HTMLElement, scenario: Scenario | null): void {
    container.textContent = "";
    if (!scenario) return;
    const view = presentResult(scenario.response);
    const price = this.root.createElement("div");
    price.className = "price";
    price.textContent = view.priceText;
    const spread = this.root.createElement("div");
    spread.className = "spread";
    spread.textContent = `trees: ${view.rangeText} (${view.stdText})`;
    container.append(price, spread);
  }

  render(): void {
    this.renderForm("base", this.el("base-form"));
    this.renderResult(this.el("base-result"), this.baseScenario);
    const submit = this.el("base-submit") as HTMLButtonElement;
    submit.disabled = !this.base || !isSubmittable(this.base) || this.inFlight.base;

    const variantButton = this.el("open-variant") as HTMLButtonElement;
    variantButton.disabled = !this.baseScenario;
    const panel = this.el("variant-panel");
    panel.classList.toggle("hidden", this.variant === null);
    if (this.variant) {
      this.renderForm("variant", this.el("variant-form"));
      this.renderResult(this.el("variant-result"), this.variantScenario);
      const vs = this.el("variant-submit") as HTMLButtonElement;
      vs.disabled = !isSubmittable(this.variant) || this.inFlight.variant;
      const promote = this.el("promote") as HTMLButtonElement;
      promote.disabled = !this.variantScenario || !this.baseScenario;

      const deltaNode = this.el("delta");
      if (this.baseScenario && this.variantScenario) {
        const pair = compareScenarios(this.baseScenario, this.variantScenario);
        deltaNode.textContent =
          `${formatDelta(pair.delta)} vs. base (${formatEuro(pair.base.response.price)})` +
          (pair.changedFields.length
            ? ` — changed: ${pair.changedFields.join(", ")}`
            : " — identical scenario");
      } else {
        deltaNode.textContent = "";
      }
    }
  }

  bind(): void {
    this.el("base-submit").onclick = () => void this.submit("base");
    this.el("open-variant").onclick = () => this.openVariant();
    (this.root.getElementById("variant-submit") ?? this.el("variant-submit")).onclick = () =>
      void this.submit("variant");
    this.el("promote").onclick = () => this.promote();
  }
}

const console_ = new PricingConsole(new ApiClient(""), document);
console_.bind();
void console_.start();
