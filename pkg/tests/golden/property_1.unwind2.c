/* nondeterministic end-level environment */
/* property: tpl_fifo_rw[tpl_h_prio].size > 0 */
/* end-level functions: 4; count constraints: 1; unwind: 2 */
/* compile together with the sources listed in the abstraction manifest */

extern int __VERIFIER_nondet_int(void);
extern void __VERIFIER_assume(int cond);

static unsigned int cnt_tpl_get_proc = 0;
static unsigned int cnt_tpl_put_new_proc = 0;
static unsigned int cnt_tpl_schedule_from_running = 0;

int main(void)
{
    int i;
    for (i = 0; i < 2; i++) {
        int choice = __VERIFIER_nondet_int();
        __VERIFIER_assume(0 <= choice && choice < 4);
        switch (choice) {
        case 0:
            __VERIFIER_assume(cnt_tpl_get_proc < cnt_tpl_put_new_proc && cnt_tpl_get_proc < cnt_tpl_schedule_from_running);
            tpl_get_proc();
            cnt_tpl_get_proc++;
            break;
        case 1:
            tpl_put_new_proc(__VERIFIER_nondet_int(), __VERIFIER_nondet_int());
            cnt_tpl_put_new_proc++;
            break;
        case 2:
            tpl_put_preempted_proc(__VERIFIER_nondet_int(), __VERIFIER_nondet_int());
            break;
        case 3:
            tpl_schedule_from_running();
            cnt_tpl_schedule_from_running++;
            break;
        }
    }
    assert(tpl_fifo_rw[tpl_h_prio].size > 0);
    return 0;
}
