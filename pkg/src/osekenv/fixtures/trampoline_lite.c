// Trampoline-style OSEK/VDX kernel core, reduced to the task, event and
// resource services and written in the mini-C subset (no macros, no
// function pointers).  Names follow the Trampoline kernel so the slicing
// results can be compared with the original analysis.

enum tpl_task_state_kind { SUSPENDED, READY, RUNNING, WAITING };
enum tpl_status { E_OK, E_OS_LIMIT, E_OS_RESOURCE, E_OS_ACCESS, E_OS_STATE };
enum tpl_limits { TASK_COUNT = 3, RESOURCE_COUNT = 2, PRIO_LEVELS = 4, FIFO_CAP = 8, INVALID_TASK = -1 };
enum tpl_null { NULL };

struct tpl_fifo {
    int size;
    int head;
    int slots[FIFO_CAP];
};

struct tpl_kern_state {
    int running;
    int priority;
    int state;
};

// ready list: one FIFO per priority level, plus the highest non-empty level
struct tpl_fifo tpl_fifo_rw[PRIO_LEVELS];
int tpl_h_prio = -1;

struct tpl_kern_state tpl_kern_storage;
struct tpl_kern_state *tpl_kern = &tpl_kern_storage;

// static configuration (generated from OIL in the real kernel)
int tpl_task_priority[TASK_COUNT] = { 1, 2, 2 };
int tpl_max_activate[TASK_COUNT] = { 1, 8, 4 };
int tpl_autostart[TASK_COUNT] = { 1, 0, 0 };

// dynamic task bookkeeping
unsigned char tpl_activate_count[TASK_COUNT];
int tpl_task_state[TASK_COUNT];
int tpl_event_pending[TASK_COUNT];
int tpl_event_wait[TASK_COUNT];
int tpl_resource_owner[RESOURCE_COUNT];
int tpl_os_started;

// ---------------------------------------------------------------- ready list

void tpl_put_new_proc(int id, int prio)
{
    int tail;
    tail = (tpl_fifo_rw[prio].head + tpl_fifo_rw[prio].size) % FIFO_CAP;
    tpl_fifo_rw[prio].slots[tail] = id;
    tpl_fifo_rw[prio].size = tpl_fifo_rw[prio].size + 1;
    if (prio > tpl_h_prio) {
        tpl_h_prio = prio;
    }
}

void tpl_put_preempted_proc(int id, int prio)
{
    tpl_fifo_rw[prio].head = (tpl_fifo_rw[prio].head + FIFO_CAP - 1) % FIFO_CAP;
    tpl_fifo_rw[prio].slots[tpl_fifo_rw[prio].head] = id;
    tpl_fifo_rw[prio].size = tpl_fifo_rw[prio].size + 1;
    if (prio > tpl_h_prio) {
        tpl_h_prio = prio;
    }
}

int tpl_get_proc(void)
{
    int id;
    int prio;
    if (tpl_h_prio == -1) {
        return INVALID_TASK;
    }
    assert(tpl_fifo_rw[tpl_h_prio].size > 0);
    prio = tpl_h_prio;
    id = tpl_fifo_rw[prio].slots[tpl_fifo_rw[prio].head];
    tpl_fifo_rw[prio].head = (tpl_fifo_rw[prio].head + 1) % FIFO_CAP;
    tpl_fifo_rw[prio].size = tpl_fifo_rw[prio].size - 1;
    while (tpl_h_prio >= 0 && tpl_fifo_rw[tpl_h_prio].size == 0) {
        tpl_h_prio = tpl_h_prio - 1;
    }
    return id;
}

// ---------------------------------------------------------------- scheduler

void tpl_start_proc(int id)
{
    tpl_kern->running = id;
    if (id == INVALID_TASK) {
        tpl_kern->priority = -1;
        tpl_kern->state = SUSPENDED;
        return;
    }
    tpl_kern->priority = tpl_task_priority[id];
    tpl_kern->state = RUNNING;
    tpl_task_state[id] = RUNNING;
}

void tpl_schedule_from_running(void)
{
    int old;
    assert(tpl_kern != NULL);
    if (tpl_h_prio < 0) {
        tpl_h_prio = -1;
    }
    if (tpl_h_prio > tpl_kern->priority) {
        assert(tpl_h_prio != -1);
        assert(tpl_kern->state == RUNNING);
        old = tpl_kern->running;
        if (old != INVALID_TASK) {
            tpl_task_state[old] = READY;
            tpl_put_preempted_proc(old, tpl_task_priority[old]);
        }
        tpl_start_proc(tpl_get_proc());
    }
}

void tpl_schedule_from_dying(void)
{
    tpl_start_proc(tpl_get_proc());
}

void tpl_schedule_from_waiting(void)
{
    tpl_start_proc(tpl_get_proc());
}

// ---------------------------------------------------------------- tasks

int tpl_activate_task(int id)
{
    if (tpl_activate_count[id] >= tpl_max_activate[id]) {
        return E_OS_LIMIT;
    }
    if (tpl_activate_count[id] == 0) {
        tpl_task_state[id] = READY;
        tpl_event_pending[id] = 0;
        tpl_put_new_proc(id, tpl_task_priority[id]);
    }
    tpl_activate_count[id]++;
    return E_OK;
}

void tpl_terminate(void)
{
    int id;
    id = tpl_kern->running;
    tpl_activate_count[id]--;
    if (tpl_activate_count[id] > 0) {
        tpl_task_state[id] = READY;
        tpl_put_new_proc(id, tpl_task_priority[id]);
    } else {
        tpl_task_state[id] = SUSPENDED;
    }
}

void tpl_release_from_wait(int id)
{
    tpl_event_wait[id] = 0;
    tpl_task_state[id] = READY;
    tpl_put_new_proc(id, tpl_task_priority[id]);
}

int tpl_activate_task_service(int id)
{
    int result;
    result = tpl_activate_task(id);
    if (result == E_OK) {
        tpl_schedule_from_running();
    }
    return result;
}

int tpl_terminate_task_service(void)
{
    tpl_terminate();
    tpl_schedule_from_dying();
    return E_OK;
}

int tpl_chain_task_service(int id)
{
    tpl_terminate();
    tpl_activate_task(id);
    tpl_schedule_from_dying();
    return E_OK;
}

int tpl_schedule_service(void)
{
    tpl_schedule_from_running();
    return E_OK;
}

// ---------------------------------------------------------------- resources

int tpl_get_resource_service(int res)
{
    if (tpl_resource_owner[res] != INVALID_TASK) {
        return E_OS_ACCESS;
    }
    tpl_resource_owner[res] = tpl_kern->running;
    return E_OK;
}

int tpl_release_resource_service(int res)
{
    if (tpl_resource_owner[res] != tpl_kern->running) {
        return E_OS_STATE;
    }
    tpl_resource_owner[res] = INVALID_TASK;
    tpl_schedule_from_running();
    return E_OK;
}

// ---------------------------------------------------------------- events

int tpl_set_event_service(int id, int mask)
{
    tpl_event_pending[id] |= mask;
    if (tpl_task_state[id] == WAITING && (tpl_event_wait[id] & mask) != 0) {
        tpl_release_from_wait(id);
        tpl_schedule_from_running();
    }
    return E_OK;
}

int tpl_clear_event_service(int mask)
{
    tpl_event_pending[tpl_kern->running] &= ~mask;
    return E_OK;
}

int tpl_wait_event_service(int mask)
{
    int id;
    id = tpl_kern->running;
    if ((tpl_event_pending[id] & mask) == 0) {
        tpl_event_wait[id] = mask;
        tpl_task_state[id] = WAITING;
        tpl_schedule_from_waiting();
    }
    return E_OK;
}

// ---------------------------------------------------------------- startup

void tpl_init_kernel(void)
{
    int res;
    res = 0;
    while (res < RESOURCE_COUNT) {
        tpl_resource_owner[res] = INVALID_TASK;
        res = res + 1;
    }
    tpl_kern->running = INVALID_TASK;
    tpl_kern->priority = -1;
    tpl_os_started = 1;
}

void tpl_activate_autostart(void)
{
    int id;
    id = 0;
    while (id < TASK_COUNT) {
        if (tpl_autostart[id]) {
            tpl_activate_task(id);
        }
        id = id + 1;
    }
}

int tpl_start_os_service(int mode)
{
    if (tpl_os_started) {
        return E_OS_STATE;
    }
    tpl_init_kernel();
    tpl_activate_autostart();
    tpl_schedule_from_running();
    return E_OK;
}

// ---------------------------------------------------------------- public API

/*@api*/
int StartOS(int mode)
{
    return tpl_start_os_service(mode);
}

/*@api*/
int ActivateTask(int id)
{
    return tpl_activate_task_service(id);
}

/*@api*/
int TerminateTask(void)
{
    return tpl_terminate_task_service();
}

/*@api*/
int ChainTask(int id)
{
    return tpl_chain_task_service(id);
}

/*@api*/
int Schedule(void)
{
    return tpl_schedule_service();
}

/*@api*/
int GetResource(int res)
{
    return tpl_get_resource_service(res);
}

/*@api*/
int ReleaseResource(int res)
{
    return tpl_release_resource_service(res);
}

/*@api*/
int SetEvent(int id, int mask)
{
    return tpl_set_event_service(id, mask);
}

/*@api*/
int ClearEvent(int mask)
{
    return tpl_clear_event_service(mask);
}

/*@api*/
int WaitEvent(int mask)
{
    return tpl_wait_event_service(mask);
}
